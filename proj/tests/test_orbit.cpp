#include <gtest/gtest.h>

#include <random>

#include "parabolic/oracle.hpp"
#include "parabolic/orbit.hpp"
#include "parabolic/parser.hpp"

using namespace parabolic;

namespace {

const PolyMap2& f() {
    static const PolyMap2 m = builtin(Family::f);
    return m;
}

}  // namespace

TEST(Iterate, Basics) {
    EXPECT_EQ(iterate(f(), {0.3, 0.3}, 1000), (Complex2{0.3, 0.3}));
    const Complex2 p = iterate(f(), {0.5, 0.0}, 1);
    EXPECT_EQ(p.z, cplx(0.25));
    EXPECT_EQ(p.w, cplx(0.0));
    const Complex2 q{cplx(0.1, 0.2), cplx(-0.3, 0.4)};
    EXPECT_EQ(iterate(builtin(Family::h, 0.1), q, 0), q);
    EXPECT_THROW(iterate(f(), q, -1), invalid_argument);
}

TEST(Iterate, EscapeReportsStep) {
    // On the axis f is z - z^2: 10, -90, -8190, ... passes 1e100 on step 6.
    try {
        iterate(f(), {10.0, 0.0}, 100);
        FAIL();
    } catch (const escape_error& e) {
        double z = 10.0;
        long long k = 0;
        while (std::abs(z) <= 1e100) {
            z = z - z * z;
            ++k;
        }
        EXPECT_EQ(e.step, k);
    }
}

TEST(OrbitParams, Validation) {
    OrbitParams p;
    EXPECT_NO_THROW(p.validate());
    p.escape_radius = 1.0;
    EXPECT_THROW(p.validate(), invalid_argument);
    p = {};
    p.origin_eps = 0.0;
    EXPECT_THROW(p.validate(), invalid_argument);
    p = {};
    p.line_eps = 1.0;
    EXPECT_THROW(p.validate(), invalid_argument);
    p = {};
    p.max_iter = 10;
    EXPECT_THROW(p.validate(), invalid_argument);
}

TEST(Classify, RegionAToLine) {
    const OrbitOutcome o = classify(f(), {0.3, 0.2}, {});
    EXPECT_EQ(o.cls, OrbitClass::converges_to_line);
    EXPECT_LT(o.sup_n_times_gap, 1.0);
    EXPECT_TRUE(o.monotone_coordinate_ok);
    EXPECT_LE(o.iterations_used, OrbitParams{}.max_iter);
}

TEST(Classify, AxisToOrigin) {
    const OrbitOutcome o = classify(f(), {0.5, 0.0}, {});
    ASSERT_EQ(o.cls, OrbitClass::converges_to_origin);
    ASSERT_TRUE(o.along);
    EXPECT_LT(chordal(*o.along, ProjDirection::from(1.0, 0.0)), 1e-12);
    EXPECT_TRUE(o.by_rate);
}

TEST(Classify, Escape) {
    const OrbitOutcome o = classify(f(), {2.0, -1.0}, {});
    EXPECT_EQ(o.cls, OrbitClass::escapes);
    EXPECT_EQ(oracle_classify(f(), {2.0, -1.0}, {}).cls, OrbitClass::escapes);
    EXPECT_GT(norm(o.final_point), 5.0);
}

TEST(Classify, DiagonalFixedInOneStep) {
    const OrbitOutcome o = classify(f(), {0.25, 0.25}, {});
    EXPECT_EQ(o.cls, OrbitClass::converges_to_line);
    EXPECT_LE(o.iterations_used, 1);
    // a fixed point off the line never converges anywhere
    const OrbitOutcome z = classify(parse_map("(z - w^2, w)"), {0.3, 0.0}, {});
    EXPECT_EQ(z.cls, OrbitClass::indeterminate);
}

TEST(Classify, HardOriginEpsilon) {
    // (1,1) lands exactly on the origin after one step.
    const PolyMap2 m = parse_map("(z - z^2, w - w^2)");
    OrbitParams p;
    p.max_iter = 100;
    const OrbitOutcome o = classify(m, {1.0, 1.0}, p);
    EXPECT_EQ(o.cls, OrbitClass::converges_to_origin);
    EXPECT_FALSE(o.by_rate);
    EXPECT_FALSE(o.along);  // window never filled
    EXPECT_EQ(o.iterations_used, 1);
}

TEST(Classify, BudgetExhaustedIsIndeterminate) {
    OrbitParams p;
    p.max_iter = 100;
    p.near_radius = 1e-300;
    const OrbitOutcome o = classify(f(), {0.5, 0.0}, p);
    EXPECT_EQ(o.cls, OrbitClass::indeterminate);
    EXPECT_EQ(o.iterations_used, 100);
}

TEST(Classify, ComplexParabolicAxisOfH) {
    // h restricted to the axis is x + a x^3; the imaginary axis is its
    // attracting petal. In the (z,w) chart the axis is the diagonal.
    const PolyMap2 gt = builtin(Family::gtilde, 0.1, 2);
    const Complex2 start = LinearChange::diagonal_to_axis().inverse().apply({cplx(0.0, 0.15), 0.0});
    OrbitParams p;
    p.max_iter = 100000;
    const OrbitOutcome o = classify(gt, start, p);
    ASSERT_EQ(o.cls, OrbitClass::converges_to_origin);
    ASSERT_TRUE(o.along);
    EXPECT_LT(chordal(*o.along, ProjDirection::from(1.0, 1.0)), 1e-12);
    // real axis start is repelled
    const Complex2 real_start = LinearChange::diagonal_to_axis().inverse().apply({0.15, 0.0});
    EXPECT_NE(classify(gt, real_start, p).cls, OrbitClass::converges_to_origin);
}

TEST(Classify, OffAxisBasinOfNegativeA) {
    // a = -0.1: the petal x > 0 contracts y like exp(-c sqrt n), so nearby
    // starts off the axis converge; on the other side y grows.
    const PolyMap2 gt = builtin(Family::gtilde, -0.1, 2);
    const auto zw = [](cplx x, cplx y) { return LinearChange::diagonal_to_axis().inverse().apply({x, y}); };
    OrbitParams p;
    p.max_iter = 20000;
    for (cplx y : {cplx(0.01), cplx(0.0, 0.02), cplx(-0.05, 0.01)}) {
        const OrbitOutcome o = classify(gt, zw(0.3, y), p);
        ASSERT_EQ(o.cls, OrbitClass::converges_to_origin) << y;
        EXPECT_TRUE(o.by_rate);
        EXPECT_LT(chordal(*o.along, ProjDirection::from(1.0, 1.0)), 1e-12);
    }
    EXPECT_NE(classify(gt, zw(-0.3, 0.01), p).cls, OrbitClass::converges_to_origin);
}

TEST(Classify, OffAxisNeverCertifiedForPositiveA) {
    // Off-axis orbits of h near the imaginary petal shrink transversally for
    // a long time before growing back like n^3.
    const PolyMap2 gt = builtin(Family::gtilde, 0.1, 2);
    OrbitParams p;
    p.max_iter = 50000;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int i = 0; i < 40; ++i) {
        const Complex2 xy{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        const Complex2 s = LinearChange::diagonal_to_axis().inverse().apply(xy);
        EXPECT_NE(classify(gt, s, p).cls, OrbitClass::converges_to_origin) << i;
    }
}

TEST(Classify, Deterministic) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.8, 1.6);
    for (int i = 0; i < 50; ++i) {
        const Complex2 s{u(rng), u(rng)};
        EXPECT_EQ(classify(f(), s, {}), classify(f(), s, {}));
    }
}

TEST(Classify, OracleAgreement) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.8, 1.6);
    OrbitParams p;
    p.max_iter = 2000;
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
        const Complex2 s{u(rng), u(rng)};
        const OrbitOutcome a = classify(f(), s, p);
        const OrbitOutcome b = oracle_classify(f(), s, p);
        if (a.cls == OrbitClass::indeterminate || b.cls == OrbitClass::indeterminate)
            continue;
        ++compared;
        EXPECT_EQ(a.cls, b.cls) << s.z << " " << s.w;
    }
    EXPECT_GT(compared, 80);
}

TEST(Oracle, MatchesDoubleIteration) {
    const Complex2 s{cplx(0.2, 0.01), cplx(0.1, -0.02)};
    const Complex2 a = iterate(f(), s, 1000);
    const OraclePoint b = oracle_iterate(f(), s, 1000);
    EXPECT_NEAR(std::abs(a.z - to_cplx(b.z)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(a.w - to_cplx(b.w)), 0.0, 1e-12);
}

TEST(Preimage, Residuals) {
    EXPECT_EQ(preimage_residuals({1.0, 0.0})[0], 0.0);
    EXPECT_EQ(preimage_residuals({0.0, 1.0})[1], 0.0);
    for (double r : preimage_residuals({0.3, 0.2}))
        EXPECT_GE(r, 0.8);
    // the preimage curves really map into the axes
    const Complex2 on{cplx(1.3, 0.2), cplx(0.3, 0.2)};
    EXPECT_NEAR(std::abs(iterate(f(), on, 1).z), 0.0, 1e-15);
}

TEST(RateFit, Synthetic) {
    std::vector<double> xs(2001), ys(2001), ones(2001, 1.0), ey(2001);
    const cplx beta = *beta_branch(1.0, 3);
    const double c = beta.real() * 1.5;
    for (int n = 1; n <= 2000; ++n) {
        xs[n] = std::pow(n, -1.0 / 3.0);
        ys[n] = 5.0 * std::pow(n, -0.5);
        ey[n] = std::exp(-c * std::pow(n, 2.0 / 3.0));
    }
    EXPECT_NEAR(rate_fit_power(xs, 10, 2000), -1.0 / 3.0, 1e-12);
    EXPECT_NEAR(rate_fit_power(ys, 10, 2000), -0.5, 1e-12);
    EXPECT_NEAR(rate_fit_stretched(ey, 3, beta, 10, 2000), 1.0, 1e-9);
    EXPECT_NEAR(rate_fit_stretched(ones, 3, beta, 10, 2000), 0.0, 1e-12);
    xs[50] = 0.0;
    EXPECT_THROW(rate_fit_power(xs, 10, 2000), invalid_argument);
    EXPECT_THROW(rate_fit_power(ys, 0, 2000), invalid_argument);
    EXPECT_THROW(rate_fit_power(ys, 10, 5000), invalid_argument);
}

TEST(Diagnostics, HAxis) {
    OrbitParams p;
    p.max_iter = 2000;
    const auto tr = diagnostics(builtin(Family::h, 0.1), {cplx(0.0, 0.15), 0.0}, p);
    ASSERT_FALSE(tr.rows.empty());
    EXPECT_FALSE(tr.escaped);
    // first step by hand: x (1 + a x^2) = 0.15i (1 - 0.00225)
    EXPECT_NEAR(std::abs(tr.rows[1].x - cplx(0.0, 0.15 * (1 - 0.1 * 0.0225))), 0.0, 1e-16);
    for (const auto& r : tr.rows) {
        EXPECT_EQ(r.u, cplx(0.0));
        EXPECT_EQ(r.sum_re_x, 0.0);
        EXPECT_TRUE(std::isinf(r.inv_y.real()));
    }
    EXPECT_LT(std::abs(tr.rows.back().x), std::abs(tr.rows.front().x));
    EXPECT_LT(tr.max_product_defect, 1e-6);
}

TEST(Diagnostics, FtildeAxisConstant) {
    OrbitParams p;
    p.max_iter = 50;
    const auto tr = diagnostics(builtin(Family::ftilde), {0.5, 0.0}, p);
    ASSERT_EQ(tr.rows.size(), 51u);
    for (const auto& r : tr.rows) {
        EXPECT_EQ(r.x, cplx(0.5));
        EXPECT_EQ(r.t, cplx(2.0));
    }
}

TEST(Diagnostics, GInDomainSumGrows) {
    const cplx beta = *beta_branch(1.0, 3);
    const cplx x0 = 0.05 * beta / std::abs(beta);
    OrbitParams p;
    p.max_iter = 100000;
    const auto tr = diagnostics(builtin(Family::g, 1.0, 3), {x0, 1e-3 * x0}, p, 1000);
    EXPECT_FALSE(tr.escaped);
    ASSERT_GE(tr.rows.size(), 50u);
    EXPECT_GT(tr.rows.back().sum_re_x, 100.0);
    for (std::size_t i = 1; i < tr.rows.size(); ++i)
        EXPECT_GT(tr.rows[i].sum_re_x, tr.rows[i - 1].sum_re_x);
    EXPECT_LT(tr.max_product_defect, 1e-6);
}

TEST(Diagnostics, Errors) {
    EXPECT_THROW(diagnostics(builtin(Family::ftilde), {0.0, 0.1}, {}), invalid_argument);
    EXPECT_THROW(diagnostics(builtin(Family::ftilde), {0.1, 0.1}, {}, 0), invalid_argument);
}
