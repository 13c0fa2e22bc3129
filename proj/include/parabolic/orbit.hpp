#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chardir.hpp"
#include "errors.hpp"
#include "poly.hpp"

namespace parabolic {

struct OrbitParams {
    long long max_iter = 10000;
    double escape_radius = 5.0;
    double origin_eps = 1e-10;
    double line_eps = 1e-10;
    /// Trailing iterates used for direction stability and line confirmation.
    int direction_window = 64;
    /// Radius inside which the parabolic rate certificate may fire.
    double near_radius = 0.25;
    /// Allowed relative deviation of the radial increments from -m*lambda.
    double rate_tolerance = 0.25;

    void validate() const {
        if (!(escape_radius > 1.0))
            throw invalid_argument("escape_radius must exceed 1");
        if (!(origin_eps > 0.0 && origin_eps < 1.0) || !(line_eps > 0.0 && line_eps < 1.0))
            throw invalid_argument("origin_eps and line_eps must lie in (0,1)");
        if (direction_window < 2)
            throw invalid_argument("direction_window must be at least 2");
        if (max_iter < direction_window)
            throw invalid_argument("max_iter must be at least direction_window");
        if (!(near_radius > 0.0) || !(rate_tolerance > 0.0 && rate_tolerance < 1.0))
            throw invalid_argument("near_radius must be positive and rate_tolerance in (0,1)");
    }
};

enum class OrbitClass { converges_to_origin, converges_to_line, escapes, indeterminate };

inline const char* class_name(OrbitClass c) {
    switch (c) {
    case OrbitClass::converges_to_origin: return "ConvergesToOrigin";
    case OrbitClass::converges_to_line: return "ConvergesToLineNotOrigin";
    case OrbitClass::escapes: return "Escapes";
    case OrbitClass::indeterminate: return "Indeterminate";
    }
    return "?";
}

struct OrbitOutcome {
    OrbitClass cls = OrbitClass::indeterminate;
    /// Limit direction for origin convergence; empty means no stable direction.
    std::optional<ProjDirection> along;
    /// Origin convergence was certified from the parabolic rate rather than by
    /// reaching origin_eps.
    bool by_rate = false;
    long long iterations_used = 0;
    Complex2 final_point{};
    /// max over visited n >= 1 of n |z_n - w_n|.
    double sup_n_times_gap = 0.0;
    /// For real starts: the smaller coordinate never dropped below its start.
    bool monotone_coordinate_ok = true;

    friend bool operator==(const OrbitOutcome&, const OrbitOutcome&) = default;
};

/// A characteristic direction together with its first non-degenerate degree
/// m+1 and eigenvalue there, when one exists among the stored components.
struct DirectionModel {
    ProjDirection direction;
    std::optional<int> m;
    cplx lambda{};
    /// Coefficients of M(t) = sum_k c_k t^k, where the transverse ratio u
    /// along v evolves as u -> u (1 + M(t)) + O(u^2) in the chart t = the
    /// dominant coordinate.
    std::vector<cplx> transverse;
    /// log(1 + M(t)) as a power series, index = power, up to t^m.
    std::vector<cplx> log_multiplier;
};

inline std::vector<DirectionModel> direction_models(const PolyMap2& map) {
    std::vector<DirectionModel> out;
    std::vector<CharDirReport> reports;
    try {
        reports = classify_directions(map);
    } catch (const dicritical_error&) {
        return out;
    }
    for (const auto& rep : reports) {
        // Snap near-integer components so that lines such as z = w can be
        // tested exactly.
        auto snap = [](cplx c) {
            const cplx r{std::round(c.real()), std::round(c.imag())};
            return std::abs(c - r) < 1e-12 ? r : c;
        };
        const ProjDirection v{snap(rep.direction.alpha), snap(rep.direction.beta)};
        DirectionModel dm{v, std::nullopt, {}, {}};
        // Shear so that v becomes the first axis: X = dominant coordinate,
        // Y = the other one minus its value on the line.
        const LinearChange shear = v.alpha_dominant() ? LinearChange(1.0, 0.0, -v.beta / v.alpha, 1.0)
                                                      : LinearChange(0.0, 1.0, 1.0, -v.alpha / v.beta);
        const PolyMap2 sheared = conjugate_linear(map, shear);
        for (const auto& [j, c] : sheared.components()) {
            dm.transverse.resize(static_cast<std::size_t>(j), cplx{});
            dm.transverse[static_cast<std::size_t>(j - 1)] = c.q.coeff(1) - c.p.coeff(0);
        }
        const DegreewiseStatus st = degreewise(map, rep.direction);
        if (st.r_plus_1) {
            dm.m = *st.r_plus_1 - 1;
            dm.lambda = st.lambda_at_r_plus_1;
            // k e_k = k a_k - sum_{j<k} j e_j a_(k-j), with 1 + M = sum a_k t^k.
            const int top = *dm.m;
            auto a = [&](int i) {
                return i >= 1 && i < static_cast<int>(dm.transverse.size()) ? dm.transverse[static_cast<std::size_t>(i)]
                                                                             : cplx{};
            };
            dm.log_multiplier.assign(static_cast<std::size_t>(top) + 1, cplx{});
            for (int k = 1; k <= top; ++k) {
                cplx acc = static_cast<double>(k) * a(k);
                for (int j = 1; j < k; ++j)
                    acc -= static_cast<double>(j) * dm.log_multiplier[static_cast<std::size_t>(j)] * a(k - j);
                dm.log_multiplier[static_cast<std::size_t>(k)] = acc / static_cast<double>(k);
            }
        }
        out.push_back(dm);
    }
    return out;
}

/// Plain n-fold iteration. Throws escape_error once |(z,w)| exceeds 1e100.
inline Complex2 iterate(const PolyMap2& map, Complex2 start, long long n) {
    if (n < 0)
        throw invalid_argument("iterate: n must be non-negative");
    const CompiledMap<cplx> f(map);
    auto ws = f.make_workspace();
    Complex2 p = start;
    for (long long k = 0; k < n; ++k) {
        p = f(p, ws);
        const double r = norm(p);
        if (!(r <= 1e100))
            throw escape_error(k + 1);
    }
    return p;
}

/// Orbit classifier for one map, reusable across many starts. The
/// iteration runs in the scalar type C; decisions are made on the
/// double images of the iterates.
///
/// Checked in order at every iterate n:
///  (a) |p_n| > escape_radius: Escapes.
///  (b) |p_n| < origin_eps: ConvergesToOrigin.
///  (c) |z_n - w_n| < line_eps with |p_n| >= 10 origin_eps for
///      direction_window consecutive iterates: ConvergesToLineNotOrigin.
///  (d) n == max_iter: ConvergesToOrigin if the rate certificate below has
///      held at every check since it was last established, else Indeterminate.
/// A start whose image equals itself exactly is decided after one step.
///
/// Rate certificate: parabolic convergence is far too slow to reach
/// origin_eps (|p_n| ~ n^(-1/m)). For an orbit that has stayed exactly on the
/// line through 0 in a characteristic direction v, non-degenerate in degree
/// m+1 with eigenvalue lambda, the dynamics are one-dimensional:
/// t -> t + lambda t^(m+1) + ..., so s = t^(-m) advances by -m lambda per
/// step. The certificate requires a stable window direction within 1e-3 of
/// v, every increment of s over the window to match -m lambda within
/// rate_tolerance, s to be moving away from 0, and |p_n| < near_radius. It is
/// rechecked every direction_window/4 steps; while it holds, a line verdict
/// is withheld.
///
/// Off such a line the observed transverse part is no evidence: it can
/// shrink for a very long time (below 1e-300 for some h orbits) before it
/// grows again. Instead the transverse multiplier 1 + M(t) of the model is
/// expanded along the petal branch the dominant coordinate (which stays well
/// resolved) has settled on, and the certificate needs that expansion to
/// force the transverse part to 0.
template <class C>
class OrbitClassifier {
public:
    OrbitClassifier(const PolyMap2& map, OrbitParams params)
        : f_(map), params_(params), models_(direction_models(map)) {
        params_.validate();
    }

    const OrbitParams& params() const { return params_; }
    const std::vector<DirectionModel>& models() const { return models_; }

    OrbitOutcome classify(const basic_point2<C>& start) const {
        const int W = params_.direction_window;
        const long long cert_stride = std::max(1, W / 4);
        auto ws = f_.make_workspace();
        std::vector<Complex2> ring(static_cast<std::size_t>(W));

        OrbitOutcome out;
        basic_point2<C> p = start;
        const Complex2 p0{to_cplx(start.z), to_cplx(start.w)};
        const bool real_start = p0.z.imag() == 0.0 && p0.w.imag() == 0.0;
        const int mono_idx = p0.z.real() <= p0.w.real() ? 0 : 1;
        const double mono_ref = mono_idx == 0 ? p0.z.real() : p0.w.real();
        int line_run = 0;
        std::optional<ProjDirection> candidate;
        // Model lines the orbit has stayed on exactly, start included.
        std::vector<char> on_model(models_.size());
        for (std::size_t k = 0; k < models_.size(); ++k)
            on_model[k] = exactly_on(models_[k].direction, p0);

        for (long long n = 0;; ++n) {
            const Complex2 pd{to_cplx(p.z), to_cplx(p.w)};
            const double nrm = norm(pd);
            const double gap = std::sqrt(norm_d(C(p.z - p.w)));
            out.final_point = pd;
            out.iterations_used = n;
            if (n >= 1 && std::isfinite(gap))
                out.sup_n_times_gap = std::max(out.sup_n_times_gap, static_cast<double>(n) * gap);
            if (real_start) {
                const double cur = mono_idx == 0 ? pd.z.real() : pd.w.real();
                if (cur < mono_ref - 1e-15)
                    out.monotone_coordinate_ok = false;
            }
            ring[static_cast<std::size_t>(n % W)] = pd;
            for (std::size_t k = 0; k < models_.size(); ++k)
                on_model[k] = on_model[k] && exactly_on(models_[k].direction, pd);
            const bool window_full = n + 1 >= W;

            if (!(nrm <= params_.escape_radius)) {
                out.cls = OrbitClass::escapes;
                return out;
            }
            if (nrm < params_.origin_eps) {
                out.cls = OrbitClass::converges_to_origin;
                if (window_full)
                    out.along = stable_direction(ring, n);
                return out;
            }
            const bool on_line = gap < params_.line_eps && nrm >= 10.0 * params_.origin_eps;
            line_run = on_line ? line_run + 1 : 0;
            const bool line_confirmed = line_run >= W;
            const bool last_step = n >= params_.max_iter;
            // A rate certificate is only a candidate: it must keep holding at
            // every later check up to the budget. Slow transverse drift can
            // mimic convergence for thousands of steps. The check also runs
            // when the line test first confirms, since the line may carry
            // orbits into the origin.
            if (!(nrm < params_.near_radius)) {
                candidate.reset();
            } else if (window_full && (n % cert_stride == 0 || line_run == W || last_step)) {
                candidate = rate_certificate(ring, n, on_model);
            }
            if (line_confirmed && !candidate) {
                out.cls = OrbitClass::converges_to_line;
                return out;
            }
            if (last_step) {
                if (candidate) {
                    out.cls = OrbitClass::converges_to_origin;
                    out.along = candidate;
                    out.by_rate = true;
                } else {
                    out.cls = OrbitClass::indeterminate;
                }
                return out;
            }

            basic_point2<C> next = f_(p, ws);
            if (scalar_traits<C>::equal(next.z, p.z) && scalar_traits<C>::equal(next.w, p.w)) {
                // Fixed point: nothing will change from here on.
                out.iterations_used = n + 1;
                out.cls = (gap < params_.line_eps && nrm >= 10.0 * params_.origin_eps) ? OrbitClass::converges_to_line
                                                                                       : OrbitClass::indeterminate;
                return out;
            }
            p = next;
        }
    }

private:
    CompiledMap<C> f_;
    OrbitParams params_;
    std::vector<DirectionModel> models_;

    const Complex2& at(const std::vector<Complex2>& ring, long long n) const {
        return ring[static_cast<std::size_t>(n % params_.direction_window)];
    }

    /// Newest direction, when the whole window lies within 1e-6 chordal
    /// diameter (bounded by twice the spread around the newest point).
    std::optional<ProjDirection> window_direction(const std::vector<Complex2>& ring, long long n) const {
        const Complex2& last = at(ring, n);
        if (last.z == cplx{} && last.w == cplx{})
            return std::nullopt;
        double spread = 0.0;
        for (const auto& q : ring) {
            if (q.z == cplx{} && q.w == cplx{})
                return std::nullopt;
            spread = std::max(spread, chordal(last.z, last.w, q.z, q.w));
        }
        if (!(2.0 * spread < 1e-6))
            return std::nullopt;
        return ProjDirection::from(last.z, last.w);
    }

    const DirectionModel* nearest_model(const ProjDirection& d) const {
        const DirectionModel* best = nullptr;
        double best_dist = 1e-3;
        for (const auto& m : models_) {
            const double dist = chordal(m.direction, d);
            if (dist < best_dist) {
                best_dist = dist;
                best = &m;
            }
        }
        return best;
    }

    std::optional<ProjDirection> stable_direction(const std::vector<Complex2>& ring, long long n) const {
        auto d = window_direction(ring, n);
        if (!d)
            return std::nullopt;
        const DirectionModel* m = nearest_model(*d);
        if (!m)
            return std::nullopt;
        return m->direction;
    }

    /// p lies on the line through 0 in direction v, with no rounding slack.
    static bool exactly_on(const ProjDirection& v, const Complex2& p) {
        return v.alpha_dominant() ? p.w == v.beta * p.z : p.z == v.alpha * p.w;
    }

    /// Asymptotic fate of the transverse part along the petal branch the
    /// orbit is on: t_n ~ omega (sigma n)^(-1/m) with sigma = -m lambda, and
    /// log|u| accumulates Re sum_k e_k t_n^k. The first k < m with a nonzero
    /// real coefficient decides (a stretched exponential); failing that,
    /// u ~ n^kappa with kappa = Re(e_m / sigma).
    static bool transverse_attracting(const DirectionModel& model, cplx t, cplx s) {
        const int m = *model.m;
        const cplx sigma = -static_cast<double>(m) * model.lambda;
        const cplx ratio = s / sigma;
        // Not yet close to the asymptotic branch.
        if (!(ratio.real() > 0.0) || std::abs(std::arg(ratio)) > std::numbers::pi / (4.0 * m))
            return false;
        const cplx root = std::pow(sigma, 1.0 / m);
        const double k = std::round(std::arg(t * root) * m / (2.0 * std::numbers::pi));
        const cplx omega = std::polar(1.0, 2.0 * std::numbers::pi * k / m);
        const cplx base = omega / root;
        const auto& e = model.log_multiplier;
        for (int j = 1; j < m && j < static_cast<int>(e.size()); ++j) {
            const cplx term = e[static_cast<std::size_t>(j)] * std::pow(base, j);
            if (std::abs(term.real()) > 1e-9 * std::abs(term))
                return term.real() < 0.0;
        }
        if (m >= static_cast<int>(e.size()))
            return false;
        const cplx kappa = e[static_cast<std::size_t>(m)] / sigma;
        return kappa.real() < -1e-9 * std::abs(kappa);
    }

    std::optional<ProjDirection> rate_certificate(const std::vector<Complex2>& ring, long long n,
                                                  const std::vector<char>& on_model) const {
        auto d = window_direction(ring, n);
        if (!d)
            return std::nullopt;
        const DirectionModel* model = nearest_model(*d);
        if (!model || !model->m)
            return std::nullopt;
        const bool exact = on_model[static_cast<std::size_t>(model - models_.data())] != 0;
        const int m = *model->m;
        const cplx step = -static_cast<double>(m) * model->lambda;
        const double tol = params_.rate_tolerance * std::abs(step);
        const bool use_z = model->direction.alpha_dominant();
        const int W = params_.direction_window;
        cplx prev{}, t_last{};
        for (long long j = n - W + 1; j <= n; ++j) {
            const Complex2& q = at(ring, j);
            const cplx t = use_z ? q.z : q.w;
            if (t == cplx{})
                return std::nullopt;
            const cplx s = std::pow(t, -m);
            if (j > n - W + 1 && !(std::abs((s - prev) - step) <= tol))
                return std::nullopt;
            prev = s;
            t_last = t;
        }
        if (!((prev * std::conj(step)).real() > 0.0))
            return std::nullopt;
        if (!exact && !transverse_attracting(*model, t_last, prev))
            return std::nullopt;
        return model->direction;
    }
};

inline OrbitOutcome classify(const PolyMap2& map, Complex2 start, const OrbitParams& params) {
    return OrbitClassifier<cplx>(map, params).classify(start);
}

// --- diagnostics in the (x,y) chart ----------------------------------------

struct DiagnosticRow {
    long long n = 0;
    cplx x, y;
    cplx u;      // y/x
    cplx v;      // y/x^2
    cplx t;      // 1/x
    cplx inv_y;  // 1/y, infinite on the axis y = 0
    double sum_re_x = 0.0;  // sum of Re x_j over j < n
    double product_defect = 0.0;
};

struct DiagnosticTrace {
    std::vector<DiagnosticRow> rows;
    long long steps = 0;
    bool truncated_at_zero = false;
    bool escaped = false;
    /// Largest product-form defect over rows with 1e-8 < |x| < 1e8.
    double max_product_defect = 0.0;
};

/// Iterate a map written in the (x,y) chart and record the chart quantities
/// every `stride` steps. Alongside the iteration, x_n is also accumulated as
/// x_0 * prod (1 + p(x_j,y_j)/x_j), with p evaluated term by term from the
/// components, and the relative disagreement is recorded.
inline DiagnosticTrace diagnostics(const PolyMap2& xy_map, Complex2 start, const OrbitParams& params,
                                   long long stride = 1) {
    if (start.z == cplx{})
        throw invalid_argument("diagnostics: start must have x != 0");
    if (stride < 1)
        throw invalid_argument("diagnostics: stride must be positive");
    const CompiledMap<cplx> f(xy_map);
    auto ws = f.make_workspace();
    DiagnosticTrace tr;
    Complex2 p = start;
    const cplx x0 = start.z;
    cplx prod = 1.0;
    double sum_re = 0.0;
    for (long long n = 0;; ++n) {
        tr.steps = n;
        if (p.z == cplx{} || std::abs(p.z) <= 1e-300) {
            tr.truncated_at_zero = true;
            break;
        }
        const cplx x = p.z, y = p.w;
        const double defect = std::abs(x - x0 * prod) / std::abs(x);
        if (std::abs(x) > 1e-8 && std::abs(x) < 1e8)
            tr.max_product_defect = std::max(tr.max_product_defect, defect);
        if (n % stride == 0) {
            const double inf = std::numeric_limits<double>::infinity();
            tr.rows.push_back({n, x, y, y / x, y / (x * x), 1.0 / x, y == cplx{} ? cplx{inf, 0.0} : 1.0 / y, sum_re,
                               defect});
        }
        if (norm(p) > params.escape_radius) {
            tr.escaped = true;
            break;
        }
        if (n >= params.max_iter)
            break;
        cplx px = 0.0;
        for (const auto& [j, c] : xy_map.components())
            px += eval_hom(c.p, p);
        prod *= 1.0 + px / x;
        sum_re += x.real();
        p = f(p, ws);
    }
    return tr;
}

/// Residuals of the first and second preimages of the axes:
/// |z-w-1|, |z-w+1|, |(z-w)(1-z-w)-1|, |(z-w)(1-z-w)+1|.
inline std::array<double, 4> preimage_residuals(Complex2 pt) {
    const cplx d = pt.z - pt.w;
    const cplx s = d * (1.0 - pt.z - pt.w);
    return {std::abs(d - 1.0), std::abs(d + 1.0), std::abs(s - 1.0), std::abs(s + 1.0)};
}

// --- rate fits ---------------------------------------------------------------

namespace detail {

inline void check_window(std::size_t size, long long lo, long long hi) {
    if (lo < 1 || hi <= lo || static_cast<std::size_t>(hi) >= size)
        throw invalid_argument("rate fit window [" + std::to_string(lo) + "," + std::to_string(hi) +
                               "] must satisfy 1 <= lo < hi < series length");
}

/// Least-squares slope of ys against xs.
inline double ls_slope(std::span<const double> xs, std::span<const double> ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace detail

/// Slope of log x_n against log n over n in [n_lo, n_hi]; xs is indexed by n.
inline double rate_fit_power(std::span<const double> xs, long long n_lo, long long n_hi) {
    detail::check_window(xs.size(), n_lo, n_hi);
    std::vector<double> lx, ly;
    for (long long n = n_lo; n <= n_hi; ++n) {
        const double v = xs[static_cast<std::size_t>(n)];
        if (!(v > 0.0))
            throw invalid_argument("rate_fit_power: series must be positive on the window (n=" + std::to_string(n) +
                                   ")");
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(v));
    }
    return detail::ls_slope(lx, ly);
}

/// Fit -log|y_n| = c n^((r-1)/r) + d from precomputed log|y_n| and return
/// c / (Re(beta) r/(r-1)).
inline double rate_fit_stretched_log(std::span<const double> log_abs_y, int r, cplx beta, long long n_lo,
                                     long long n_hi) {
    detail::check_window(log_abs_y.size(), n_lo, n_hi);
    if (r < 2)
        throw invalid_argument("rate_fit_stretched: r must be at least 2");
    const double expo = static_cast<double>(r - 1) / r;
    std::vector<double> lx, ly;
    for (long long n = n_lo; n <= n_hi; ++n) {
        const double v = log_abs_y[static_cast<std::size_t>(n)];
        if (!std::isfinite(v))
            throw invalid_argument("rate_fit_stretched: series must be nonzero on the window (n=" +
                                   std::to_string(n) + ")");
        lx.push_back(std::pow(static_cast<double>(n), expo));
        ly.push_back(-v);
    }
    return detail::ls_slope(lx, ly) / (beta.real() * r / (r - 1.0));
}

inline double rate_fit_stretched(std::span<const double> abs_y, int r, cplx beta, long long n_lo, long long n_hi) {
    std::vector<double> logs(abs_y.size(), 0.0);
    for (std::size_t i = 0; i < abs_y.size(); ++i)
        logs[i] = abs_y[i] > 0.0 ? std::log(abs_y[i]) : -std::numeric_limits<double>::infinity();
    return rate_fit_stretched_log(logs, r, beta, n_lo, n_hi);
}

}  // namespace parabolic
