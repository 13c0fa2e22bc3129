#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "scalar.hpp"

namespace parabolic {

/// Aberth-Ehrlich simultaneous iteration for a[0] + a[1] u + ... + a[n] u^n.
/// a[n] must be nonzero. Roots are returned unordered, with multiplicity
/// (a k-fold root appears k times, to roughly eps^(1/k) accuracy).
inline std::vector<cplx> aberth_roots(std::span<const cplx> a, int max_iter = 1000, double tol = 1e-13) {
    const int n = static_cast<int>(a.size()) - 1;
    if (n <= 0)
        return {};
    if (n == 1)
        return {-a[0] / a[1]};

    // Start on a circle of radius equal to the geometric mean of root moduli,
    // rotated off the real axis so symmetric polynomials do not stall.
    const double lead = std::abs(a[static_cast<std::size_t>(n)]);
    double radius = std::pow(std::abs(a[0]) / lead, 1.0 / n);
    if (!(radius > 0.0) || !std::isfinite(radius))
        radius = 1.0;
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        z[static_cast<std::size_t>(k)] = std::polar(radius, 2.0 * std::numbers::pi * k / n + 0.4);

    auto eval = [&](cplx x, cplx& deriv) {
        cplx p = a[static_cast<std::size_t>(n)];
        cplx dp = 0.0;
        for (int i = n - 1; i >= 0; --i) {
            dp = dp * x + p;
            p = p * x + a[static_cast<std::size_t>(i)];
        }
        deriv = dp;
        return p;
    };

    std::vector<bool> done(z.size(), false);
    for (int it = 0; it < max_iter; ++it) {
        double worst = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            if (done[k])
                continue;
            cplx dp;
            const cplx p = eval(z[k], dp);
            if (p == cplx{}) {
                done[k] = true;
                continue;
            }
            const cplx ratio = p / dp;
            cplx sum = 0.0;
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != k && z[j] != z[k])
                    sum += 1.0 / (z[k] - z[j]);
            const cplx step = ratio / (1.0 - ratio * sum);
            if (!is_finite(step))
                continue;
            z[k] -= step;
            const double rel = std::abs(step) / std::max(1.0, std::abs(z[k]));
            if (rel < tol)
                done[k] = true;
            worst = std::max(worst, rel);
        }
        if (worst < tol)
            break;
    }
    return z;
}

/// Taylor coefficients of the polynomial around c: t[j] = p^(j)(c) / j!.
inline std::vector<cplx> taylor_shift(std::span<const cplx> a, cplx c) {
    std::vector<cplx> t(a.begin(), a.end());
    const int n = static_cast<int>(t.size()) - 1;
    for (int j = 0; j < n; ++j)
        for (int i = n - 1; i >= j; --i)
            t[static_cast<std::size_t>(i)] += c * t[static_cast<std::size_t>(i + 1)];
    return t;
}

}  // namespace parabolic
