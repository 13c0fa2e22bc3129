#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"

namespace parabolic {

/// A point of C^2. The first coordinate is z (or x), the second w (or y).
template <class C>
struct basic_point2 {
    C z{};
    C w{};

    friend bool operator==(const basic_point2&, const basic_point2&) = default;
};

using Complex2 = basic_point2<cplx>;

inline bool is_finite(const Complex2& p) { return is_finite(p.z) && is_finite(p.w); }

/// Euclidean norm |(z,w)|.
template <class C>
inline double norm(const basic_point2<C>& p) { return std::sqrt(norm_d(p.z) + norm_d(p.w)); }

/// Homogeneous polynomial in two variables; coeffs[i] multiplies z^(d-i) w^i.
class HomPoly2 {
public:
    HomPoly2() = default;

    HomPoly2(int degree, std::vector<cplx> coeffs) : degree_(degree), coeffs_(std::move(coeffs)) {
        if (degree_ < 0)
            throw invalid_map("homogeneous polynomial degree must be non-negative");
        if (coeffs_.size() != static_cast<std::size_t>(degree_) + 1)
            throw invalid_map("homogeneous polynomial of degree " + std::to_string(degree_) + " needs " +
                              std::to_string(degree_ + 1) + " coefficients, got " +
                              std::to_string(coeffs_.size()));
        for (auto& c : coeffs_) {
            if (!is_finite(c))
                throw invalid_map("non-finite coefficient");
            // -0.0 and +0.0 compare equal but print differently; keep one.
            c = {c.real() + 0.0, c.imag() + 0.0};
        }
    }

    static HomPoly2 zero(int degree) { return {degree, std::vector<cplx>(static_cast<std::size_t>(degree) + 1)}; }

    int degree() const { return degree_; }
    std::span<const cplx> coeffs() const { return coeffs_; }
    cplx coeff(int i) const { return coeffs_[static_cast<std::size_t>(i)]; }

    bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == cplx{}; });
    }

    double max_abs() const {
        double m = 0.0;
        for (auto c : coeffs_)
            m = std::max(m, std::abs(c));
        return m;
    }

    friend bool operator==(const HomPoly2&, const HomPoly2&) = default;

private:
    int degree_ = 0;
    std::vector<cplx> coeffs_{cplx{}};
};

/// Sum of coeffs[i] z^(d-i) w^i, Horner in w with the z powers folded in.
inline cplx eval_hom(const HomPoly2& poly, Complex2 pt) {
    const int d = poly.degree();
    cplx acc = poly.coeff(d);
    cplx zk = 1.0;
    for (int i = d - 1; i >= 0; --i) {
        zk *= pt.z;
        acc = acc * pt.w + poly.coeff(i) * zk;
    }
    return acc;
}

inline HomPoly2 operator+(const HomPoly2& a, const HomPoly2& b) {
    if (a.degree() != b.degree())
        throw invalid_map("adding homogeneous polynomials of different degree");
    std::vector<cplx> c(a.coeffs().begin(), a.coeffs().end());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] += b.coeffs()[i];
    return {a.degree(), std::move(c)};
}

inline HomPoly2 operator*(cplx s, const HomPoly2& a) {
    std::vector<cplx> c(a.coeffs().begin(), a.coeffs().end());
    for (auto& x : c)
        x *= s;
    return {a.degree(), std::move(c)};
}

inline HomPoly2 operator-(const HomPoly2& a, const HomPoly2& b) { return a + cplx{-1.0} * b; }

/// Product of homogeneous polynomials (binomial convolution of coefficients).
inline HomPoly2 operator*(const HomPoly2& a, const HomPoly2& b) {
    std::vector<cplx> c(static_cast<std::size_t>(a.degree() + b.degree()) + 1);
    for (int i = 0; i <= a.degree(); ++i)
        for (int j = 0; j <= b.degree(); ++j)
            c[static_cast<std::size_t>(i + j)] += a.coeff(i) * b.coeff(j);
    return {a.degree() + b.degree(), std::move(c)};
}

/// One homogeneous component P_j = (p_j, q_j).
struct Component {
    HomPoly2 p;
    HomPoly2 q;

    bool is_zero() const { return p.is_zero() && q.is_zero(); }
    friend bool operator==(const Component&, const Component&) = default;
};

/// z -> z + sum_j P_j(z), a polynomial self-map of C^2 tangent to the identity.
///
/// Only components of degree >= 2 can be stored, so the map fixes the origin
/// with differential Id there. Identically zero components are dropped; at
/// least one nonzero component must remain.
class PolyMap2 {
public:
    explicit PolyMap2(std::map<int, Component> components) : components_(std::move(components)) {
        for (auto it = components_.begin(); it != components_.end();) {
            const int j = it->first;
            if (j < 2)
                throw invalid_map("component of degree " + std::to_string(j) +
                                  " not allowed: the map must be the identity plus terms of degree >= 2");
            if (it->second.p.degree() != j || it->second.q.degree() != j)
                throw invalid_map("component stored under degree " + std::to_string(j) +
                                  " has mismatched polynomial degree");
            if (it->second.is_zero())
                it = components_.erase(it);
            else
                ++it;
        }
        if (components_.empty())
            throw invalid_map("map is the identity: no nonzero component of degree >= 2");
    }

    /// Degree k+1 of the lowest nonzero component.
    int order() const { return components_.begin()->first; }
    int top_degree() const { return components_.rbegin()->first; }

    const std::map<int, Component>& components() const { return components_; }

    /// The degree-j component, or the zero component when none is stored.
    Component component(int j) const {
        if (auto it = components_.find(j); it != components_.end())
            return it->second;
        return {HomPoly2::zero(j), HomPoly2::zero(j)};
    }

    bool has_component(int j) const { return components_.count(j) != 0; }

    friend bool operator==(const PolyMap2&, const PolyMap2&) = default;

private:
    std::map<int, Component> components_;
};

inline int order(const PolyMap2& map) { return map.order(); }

inline Complex2 eval_map(const PolyMap2& map, Complex2 pt) {
    Complex2 out = pt;
    for (const auto& [j, c] : map.components()) {
        out.z += eval_hom(c.p, pt);
        out.w += eval_hom(c.q, pt);
    }
    return out;
}

/// Largest coefficient modulus across all components.
inline double coeff_scale(const PolyMap2& map) {
    double m = 0.0;
    for (const auto& [j, c] : map.components())
        m = std::max({m, c.p.max_abs(), c.q.max_abs()});
    return m;
}

/// Invertible complex 2x2 matrix acting on (z,w) column vectors.
class LinearChange {
public:
    LinearChange(cplx a, cplx b, cplx c, cplx d) : m_{a, b, c, d} {
        for (auto x : m_)
            if (!is_finite(x))
                throw invalid_map("linear change has a non-finite entry");
        const double op = operator_norm();
        if (!(std::abs(det()) > 1e-14 * op * op))
            throw invalid_map("linear change is not invertible");
    }

    static LinearChange identity() { return {1.0, 0.0, 0.0, 1.0}; }

    /// l(z,w) = (z+w, z-w): sends the diagonal {z=w} to the axis {y=0}.
    static LinearChange diagonal_to_axis() { return {1.0, 1.0, 1.0, -1.0}; }

    cplx operator()(int row, int col) const { return m_[static_cast<std::size_t>(2 * row + col)]; }
    cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    /// Largest singular value.
    double operator_norm() const {
        // Eigenvalues of M^H M are (t +- sqrt(t^2 - 4 |det|^2)) / 2 with t = ||M||_F^2.
        double t = 0.0;
        for (auto x : m_)
            t += std::norm(x);
        const double dd = std::norm(det());
        return std::sqrt(0.5 * (t + std::sqrt(std::max(0.0, t * t - 4.0 * dd))));
    }

    LinearChange inverse() const {
        const cplx dt = det();
        return {m_[3] / dt, -m_[1] / dt, -m_[2] / dt, m_[0] / dt};
    }

    Complex2 apply(Complex2 p) const { return {m_[0] * p.z + m_[1] * p.w, m_[2] * p.z + m_[3] * p.w}; }

private:
    std::array<cplx, 4> m_;
};

/// L o f o L^-1, re-expanded into homogeneous components.
inline PolyMap2 conjugate_linear(const PolyMap2& map, const LinearChange& L) {
    const LinearChange Li = L.inverse();
    // z = Li(0,0) x + Li(0,1) y and w = Li(1,0) x + Li(1,1) y as degree-1 forms.
    const HomPoly2 zform(1, {Li(0, 0), Li(0, 1)});
    const HomPoly2 wform(1, {Li(1, 0), Li(1, 1)});

    const int top = map.top_degree();
    std::vector<HomPoly2> zpow{HomPoly2(0, {1.0})}, wpow{HomPoly2(0, {1.0})};
    for (int k = 1; k <= top; ++k) {
        zpow.push_back(zpow.back() * zform);
        wpow.push_back(wpow.back() * wform);
    }
    auto substitute = [&](const HomPoly2& poly) {
        const int d = poly.degree();
        HomPoly2 out = HomPoly2::zero(d);
        for (int i = 0; i <= d; ++i)
            if (poly.coeff(i) != cplx{})
                out = out + poly.coeff(i) * (zpow[static_cast<std::size_t>(d - i)] * wpow[static_cast<std::size_t>(i)]);
        return out;
    };

    std::map<int, Component> out;
    for (const auto& [j, c] : map.components()) {
        const HomPoly2 ps = substitute(c.p);
        const HomPoly2 qs = substitute(c.q);
        out.emplace(j, Component{L(0, 0) * ps + L(0, 1) * qs, L(1, 0) * ps + L(1, 1) * qs});
    }
    return PolyMap2(std::move(out));
}

/// Dense coefficient tables in the scalar type C, for tight iteration loops.
template <class C>
class CompiledMap {
public:
    /// Scratch space for one evaluation thread.
    struct workspace {
        std::vector<C> zpow;
    };

    explicit CompiledMap(const PolyMap2& map) : top_(map.top_degree()) {
        for (const auto& [j, c] : map.components()) {
            degrees_.push_back(j);
            offsets_.push_back(p_.size());
            for (int i = 0; i <= j; ++i) {
                p_.push_back(scalar_traits<C>::from(c.p.coeff(i)));
                q_.push_back(scalar_traits<C>::from(c.q.coeff(i)));
            }
        }
    }

    int top_degree() const { return top_; }

    workspace make_workspace() const { return workspace{std::vector<C>(static_cast<std::size_t>(top_) + 1)}; }

    basic_point2<C> operator()(const basic_point2<C>& pt, workspace& ws) const {
        auto& zp = ws.zpow;
        zp[0] = scalar_traits<C>::from(1.0);
        for (int k = 1; k <= top_; ++k)
            zp[static_cast<std::size_t>(k)] = cmul(zp[static_cast<std::size_t>(k - 1)], pt.z);
        basic_point2<C> out = pt;
        for (std::size_t s = 0; s < degrees_.size(); ++s) {
            const int j = degrees_[s];
            const C* pc = p_.data() + offsets_[s];
            const C* qc = q_.data() + offsets_[s];
            C accp = pc[j];
            C accq = qc[j];
            for (int i = j - 1; i >= 0; --i) {
                const C& zk = zp[static_cast<std::size_t>(j - i)];
                accp = cmul(accp, pt.w) + cmul(pc[i], zk);
                accq = cmul(accq, pt.w) + cmul(qc[i], zk);
            }
            out.z += accp;
            out.w += accq;
        }
        return out;
    }

    basic_point2<C> operator()(const basic_point2<C>& pt) const {
        auto ws = make_workspace();
        return (*this)(pt, ws);
    }

private:
    int top_;
    std::vector<int> degrees_;
    std::vector<std::size_t> offsets_;
    std::vector<C> p_;
    std::vector<C> q_;
};

}  // namespace parabolic
