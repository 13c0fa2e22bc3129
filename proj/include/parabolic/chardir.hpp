#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "poly.hpp"
#include "roots.hpp"

namespace parabolic {

/// A point [alpha:beta] of P^1(C), stored in canonical form: the larger
/// coordinate has modulus 1 and is real positive (alpha wins ties).
struct ProjDirection {
    cplx alpha{1.0};
    cplx beta{0.0};

    static ProjDirection from(cplx a, cplx b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (!(ma > 0.0 || mb > 0.0) || !is_finite(a) || !is_finite(b))
            throw invalid_argument("projective direction needs a finite nonzero representative");
        const bool alpha_dominant = ma >= mb || (mb - ma) <= 1e-12 * mb;
        const cplx lead = alpha_dominant ? a : b;
        const cplx scale = std::conj(lead) / (std::abs(lead) * std::abs(lead));
        ProjDirection d{a * scale, b * scale};
        (alpha_dominant ? d.alpha : d.beta) = 1.0;
        return d;
    }

    bool alpha_dominant() const { return alpha == cplx{1.0}; }

    friend bool operator==(const ProjDirection&, const ProjDirection&) = default;
};

/// Chordal distance between [a:b] and [c:d]; lies in [0,1].
inline double chordal(cplx a, cplx b, cplx c, cplx d) {
    const double num = std::abs(a * d - b * c);
    const double den = std::sqrt((std::norm(a) + std::norm(b)) * (std::norm(c) + std::norm(d)));
    return num / den;
}

inline double chordal(const ProjDirection& u, const ProjDirection& v) { return chordal(u.alpha, u.beta, v.alpha, v.beta); }

/// r = z q - w p, whose zeros in P^1 are the characteristic directions of P.
inline HomPoly2 r_polynomial(const Component& P) {
    const int d = P.p.degree();
    if (P.q.degree() != d)
        throw invalid_map("r_polynomial: p and q must have the same degree");
    std::vector<cplx> c(static_cast<std::size_t>(d) + 2);
    for (int i = 0; i <= d; ++i) {
        c[static_cast<std::size_t>(i)] += P.q.coeff(i);
        c[static_cast<std::size_t>(i + 1)] -= P.p.coeff(i);
    }
    return {d + 1, std::move(c)};
}

struct ProjRoot {
    ProjDirection direction;
    int multiplicity = 1;
};

/// Zeros of a binary form; dicritical when the form vanishes identically.
struct ProjRoots {
    bool dicritical = false;
    std::vector<ProjRoot> roots;
};

inline double detail_binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i)
        b = b * (n - k + i) / i;
    return b;
}

/// Roots in P^1 of a homogeneous polynomial, with multiplicities summing to its degree.
inline ProjRoots proj_roots(const HomPoly2& poly) {
    if (poly.is_zero())
        return {true, {}};
    const int d = poly.degree();
    const double scale = poly.max_abs();
    auto negligible = [&](int i) { return std::abs(poly.coeff(i)) <= 1e-14 * scale; };

    // In the chart z = 1 the form is sum c_i u^i with u = w/z. Vanishing top
    // coefficients are roots at infinity [0:1]; vanishing low ones are u = 0.
    int top = d;
    while (top > 0 && negligible(top))
        --top;
    int low = 0;
    while (low < top && negligible(low))
        ++low;

    std::vector<cplx> chart;
    for (int i = low; i <= top; ++i)
        chart.push_back(poly.coeff(i));
    std::vector<cplx> u = aberth_roots(chart);

    // Single-linkage clusters in the chordal metric, tight radius first.
    struct Cluster {
        std::vector<cplx> members;
    };
    std::vector<Cluster> clusters;
    auto dist = [](cplx x, cplx y) { return chordal(1.0, x, 1.0, y); };
    for (cplx x : u) {
        std::vector<std::size_t> hits;
        for (std::size_t k = 0; k < clusters.size(); ++k)
            for (cplx y : clusters[k].members)
                if (dist(x, y) < 1e-8) {
                    hits.push_back(k);
                    break;
                }
        if (hits.empty()) {
            clusters.push_back({{x}});
            continue;
        }
        auto& into = clusters[hits.front()].members;
        into.push_back(x);
        for (auto it = hits.rbegin(); it != hits.rend() - 1; ++it) {
            into.insert(into.end(), clusters[*it].members.begin(), clusters[*it].members.end());
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(*it));
        }
    }

    // Multiple roots from Aberth spread to about eps^(1/m). Merge nearby
    // clusters when the Taylor coefficients at the centroid say it is an
    // m-fold root: each t_k (k < m) is either within its rounding noise of
    // zero or small enough that the m roots sit within 1e-8 of the centroid.
    auto centroid = [](const std::vector<cplx>& xs) {
        cplx s = 0.0;
        for (cplx x : xs)
            s += x;
        return s / static_cast<double>(xs.size());
    };
    // Newton on the (m-1)-th derivative, which has a simple root at an
    // m-fold root of the chart polynomial.
    auto polish = [&](cplx c, int m) {
        const int n = static_cast<int>(chart.size()) - 1;
        std::vector<cplx> der;
        for (int j = 0; j + m - 1 <= n; ++j)
            der.push_back(chart[static_cast<std::size_t>(j + m - 1)] * detail_binomial(j + m - 1, j));
        if (der.size() < 2)
            return c;
        for (int it = 0; it < 60; ++it) {
            cplx v = der.back(), dv = 0.0;
            for (int i = static_cast<int>(der.size()) - 2; i >= 0; --i) {
                dv = dv * c + v;
                v = v * c + der[static_cast<std::size_t>(i)];
            }
            if (dv == cplx{})
                break;
            const cplx step = v / dv;
            if (!is_finite(step))
                break;
            c -= step;
            if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c)))
                break;
        }
        return c;
    };
    auto is_multiple_root = [&](cplx c, int m) {
        const auto t = taylor_shift(chart, c);
        const double tm = std::abs(t[static_cast<std::size_t>(m)]);
        if (tm == 0.0)
            return false;
        const int n = static_cast<int>(chart.size()) - 1;
        const double ac = std::abs(c);
        const double rad = 1e-8 * (1.0 + ac);
        for (int k = 0; k < m; ++k) {
            double noise = 0.0;
            for (int i = k; i <= n; ++i)
                noise += std::abs(chart[static_cast<std::size_t>(i)]) * detail_binomial(i, k) * std::pow(ac, i - k);
            noise *= 64.0 * std::numeric_limits<double>::epsilon();
            if (std::abs(t[static_cast<std::size_t>(k)]) > noise + tm * std::pow(rad, m - k))
                return false;
        }
        return true;
    };
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < clusters.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
                bool close = false;
                for (cplx x : clusters[i].members)
                    for (cplx y : clusters[j].members)
                        close = close || dist(x, y) < 1e-4;
                if (!close)
                    continue;
                std::vector<cplx> all = clusters[i].members;
                all.insert(all.end(), clusters[j].members.begin(), clusters[j].members.end());
                const int m = static_cast<int>(all.size());
                const cplx c0 = centroid(all);
                const cplx c = polish(c0, m);
                if (dist(c, c0) < 1e-4 && is_multiple_root(c, m)) {
                    clusters[i].members = std::move(all);
                    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                }
            }
    }

    ProjRoots out;
    auto tidy = [](cplx x) {
        const double tiny = 1e-15 * std::max(1.0, std::abs(x));
        return cplx{std::abs(x.real()) < tiny ? 0.0 : x.real(), std::abs(x.imag()) < tiny ? 0.0 : x.imag()};
    };
    for (const auto& c : clusters) {
        const int m = static_cast<int>(c.members.size());
        const cplx c0 = centroid(c.members);
        cplx root = polish(c0, m);
        if (!(dist(root, c0) < 1e-6))
            root = c0;
        out.roots.push_back({ProjDirection::from(1.0, tidy(root)), m});
    }
    if (low > 0)
        out.roots.push_back({ProjDirection::from(1.0, 0.0), low});
    if (top < d)
        out.roots.push_back({ProjDirection::from(0.0, 1.0), d - top});

    // Deterministic order: by chart value u = beta/alpha, infinity last.
    std::sort(out.roots.begin(), out.roots.end(), [](const ProjRoot& x, const ProjRoot& y) {
        const bool xi = x.direction.alpha == cplx{}, yi = y.direction.alpha == cplx{};
        if (xi != yi)
            return yi;
        if (xi)
            return false;
        const cplx ux = x.direction.beta / x.direction.alpha, uy = y.direction.beta / y.direction.alpha;
        if (ux.real() != uy.real())
            return ux.real() < uy.real();
        return ux.imag() < uy.imag();
    });
    return out;
}

/// Modulus of z q(v) - w p(v) on the canonical representative.
inline double parallel_defect(const Component& P, const ProjDirection& v) {
    const Complex2 pt{v.alpha, v.beta};
    return std::abs(v.alpha * eval_hom(P.q, pt) - v.beta * eval_hom(P.p, pt));
}

/// lambda with P(v) = lambda v, read off in the dominant coordinate of the
/// canonical representative.
inline cplx eigenvalue(const Component& P, const ProjDirection& v) {
    const Complex2 pt{v.alpha, v.beta};
    return v.alpha_dominant() ? eval_hom(P.p, pt) / v.alpha : eval_hom(P.q, pt) / v.beta;
}

inline double component_scale(const Component& P) { return std::max(P.p.max_abs(), P.q.max_abs()); }

/// |lambda| below 1e-8 times the largest coefficient of P counts as zero.
inline bool is_degenerate_eigenvalue(cplx lambda, const Component& P) {
    return std::abs(lambda) < 1e-8 * component_scale(P);
}

inline bool is_characteristic(const Component& P, const ProjDirection& v) {
    if (P.is_zero())
        return true;
    return parallel_defect(P, v) <= 1e-8 * component_scale(P);
}

struct CharDirReport {
    ProjDirection direction;
    int multiplicity = 1;
    cplx lambda{};
    bool degenerate = false;
    std::optional<cplx> director;
};

/// Director of a non-degenerate characteristic direction of an order-2 map:
/// the chart derivative of r at the direction divided by the matching
/// coordinate of P. Both charts give the same value; the dominant one is used.
inline cplx director(const PolyMap2& map, const ProjDirection& v) {
    if (map.order() != 2)
        throw undefined_director("director implemented only for order-2 germs (order is " +
                                 std::to_string(map.order()) + ")");
    const Component P = map.component(2);
    if (!is_characteristic(P, v))
        throw undefined_director("director undefined: not a characteristic direction");
    if (is_degenerate_eigenvalue(eigenvalue(P, v), P))
        throw undefined_director("director undefined for degenerate direction");
    const HomPoly2 r = r_polynomial(P);
    const int d = r.degree();
    if (v.alpha_dominant()) {
        const cplx m = v.beta / v.alpha;
        cplx deriv = 0.0, mk = 1.0;
        for (int i = 1; i <= d; ++i) {
            deriv += static_cast<double>(i) * r.coeff(i) * mk;
            mk *= m;
        }
        return deriv / eval_hom(P.p, {1.0, m});
    }
    const cplx s = v.alpha / v.beta;
    // r(s,1) = sum r_i s^(d-i)
    cplx deriv = 0.0, sk = 1.0;
    for (int i = d - 1; i >= 0; --i) {
        deriv += static_cast<double>(d - i) * r.coeff(i) * sk;
        sk *= s;
    }
    return -deriv / eval_hom(P.q, {s, 1.0});
}

/// Characteristic directions of the lowest-order component, with
/// eigenvalue, degeneracy and (order 2 only) director. Throws
/// dicritical_error when every direction is characteristic.
inline std::vector<CharDirReport> classify_directions(const PolyMap2& map) {
    const Component P = map.component(map.order());
    const ProjRoots roots = proj_roots(r_polynomial(P));
    if (roots.dicritical)
        throw dicritical_error();
    std::vector<CharDirReport> out;
    for (const auto& root : roots.roots) {
        CharDirReport rep;
        rep.direction = root.direction;
        rep.multiplicity = root.multiplicity;
        rep.lambda = eigenvalue(P, root.direction);
        rep.degenerate = is_degenerate_eigenvalue(rep.lambda, P);
        if (!rep.degenerate && map.order() == 2)
            rep.director = director(map, root.direction);
        out.push_back(rep);
    }
    return out;
}

struct DegreeStatus {
    int degree = 0;
    bool is_char_dir = false;
    bool degenerate = false;
    cplx lambda{};
};

/// How a direction behaves component by component, from the order up to the
/// map's top degree.
struct DegreewiseStatus {
    std::vector<DegreeStatus> per_degree;
    /// Largest s such that v is characteristic for every degree k+1..s.
    int s_truncated = 0;
    /// s_truncated reached the top stored degree (s is infinite as far as the
    /// polynomial map can tell).
    bool through_top = false;
    /// First degree where v is non-degenerate after being degenerate below it.
    std::optional<int> r_plus_1;
    cplx lambda_at_r_plus_1{};
};

inline DegreewiseStatus degreewise(const PolyMap2& map, const ProjDirection& v) {
    DegreewiseStatus st;
    bool chain = true;
    st.s_truncated = map.order() - 1;
    for (int j = map.order(); j <= map.top_degree(); ++j) {
        const Component P = map.component(j);
        DegreeStatus ds;
        ds.degree = j;
        ds.is_char_dir = is_characteristic(P, v);
        ds.lambda = P.is_zero() ? cplx{} : eigenvalue(P, v);
        ds.degenerate = P.is_zero() || is_degenerate_eigenvalue(ds.lambda, P);
        if (chain && ds.is_char_dir) {
            st.s_truncated = j;
            if (!ds.degenerate && !st.r_plus_1) {
                st.r_plus_1 = j;
                st.lambda_at_r_plus_1 = ds.lambda;
            }
        } else {
            chain = false;
        }
        st.per_degree.push_back(ds);
    }
    st.through_top = chain;
    return st;
}

/// A branch of (-a r)^(-1/r) with strictly positive real part, if any.
/// Ties go to the larger real part, then the smaller |argument|, then the
/// non-negative argument.
inline std::optional<cplx> beta_branch(cplx a, int r) {
    if (a == cplx{})
        throw invalid_argument("beta_branch: a must be nonzero");
    if (r < 1)
        throw invalid_argument("beta_branch: r must be positive");
    const cplx target = -1.0 / (a * static_cast<double>(r));
    const double mod = std::pow(std::abs(target), 1.0 / r);
    const double arg = std::arg(target);
    std::optional<cplx> best;
    for (int k = 0; k < r; ++k) {
        double theta = (arg + 2.0 * std::numbers::pi * k) / r;
        theta = std::remainder(theta, 2.0 * std::numbers::pi);
        const cplx root = std::polar(mod, theta);
        if (!(root.real() > 1e-12 * mod))
            continue;
        if (!best) {
            best = root;
            continue;
        }
        const double tie = 1e-12 * mod;
        if (root.real() > best->real() + tie) {
            best = root;
        } else if (std::abs(root.real() - best->real()) <= tie) {
            const double a1 = std::abs(std::arg(root)), a0 = std::abs(std::arg(*best));
            if (a1 < a0 - 1e-12 || (std::abs(a1 - a0) <= 1e-12 && std::arg(root) >= 0.0))
                best = root;
        }
    }
    return best;
}

}  // namespace parabolic
