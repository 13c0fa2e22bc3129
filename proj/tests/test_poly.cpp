#include <gtest/gtest.h>

#include <random>

#include "parabolic/parser.hpp"
#include "parabolic/poly.hpp"

using namespace parabolic;

namespace {

// p(z,w) = -z^2 + zw, the quadratic part of z(1-(z-w)).
HomPoly2 f_p() { return HomPoly2(2, {-1.0, 1.0, 0.0}); }

cplx rand_c(std::mt19937_64& rng, double r = 1.0) {
    std::uniform_real_distribution<double> u(-r, r);
    return {u(rng), u(rng)};
}

PolyMap2 random_map(std::mt19937_64& rng, int top) {
    std::map<int, Component> comps;
    for (int j = 2; j <= top; ++j) {
        std::vector<cplx> p, q;
        for (int i = 0; i <= j; ++i) {
            p.push_back(rand_c(rng));
            q.push_back(rand_c(rng));
        }
        comps.emplace(j, Component{HomPoly2(j, p), HomPoly2(j, q)});
    }
    return PolyMap2(comps);
}

}  // namespace

TEST(EvalHom, AxisDirection) { EXPECT_EQ(eval_hom(f_p(), {1.0, 0.0}), cplx(-1.0)); }

TEST(EvalHom, VanishesAtOrigin) {
    EXPECT_EQ(eval_hom(f_p(), {0.0, 0.0}), cplx(0.0));
    EXPECT_EQ(eval_hom(HomPoly2(5, {1, 2, 3, 4, 5, 6}), {0.0, 0.0}), cplx(0.0));
}

TEST(EvalHom, HandValue) {
    // -0.09 + 0.06
    EXPECT_NEAR(std::abs(eval_hom(f_p(), {0.3, 0.2}) - cplx(-0.03)), 0.0, 1e-16);
}

TEST(EvalHom, Homogeneity) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + trial % 6;
        std::vector<cplx> c;
        for (int i = 0; i <= d; ++i)
            c.push_back(rand_c(rng));
        const HomPoly2 poly(d, c);
        const Complex2 pt{rand_c(rng), rand_c(rng)};
        const cplx t = rand_c(rng, 10.0);
        const cplx lhs = eval_hom(poly, {t * pt.z, t * pt.w});
        const cplx rhs = std::pow(t, d) * eval_hom(poly, pt);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(HomPoly2, RejectsWrongLength) {
    EXPECT_THROW(HomPoly2(2, {1.0, 2.0}), invalid_map);
    EXPECT_THROW(HomPoly2(1, {1.0, std::nan("")}), invalid_map);
}

TEST(PolyMap2, RejectsLowDegreeAndIdentity) {
    EXPECT_THROW(PolyMap2({{1, Component{HomPoly2(1, {1.0, 0.0}), HomPoly2(1, {0.0, 0.0})}}}), invalid_map);
    EXPECT_THROW(PolyMap2({{2, Component{HomPoly2::zero(2), HomPoly2::zero(2)}}}), invalid_map);
    EXPECT_THROW(PolyMap2(std::map<int, Component>{}), invalid_map);
}

TEST(EvalMap, FixesDiagonal) {
    const PolyMap2 f = builtin(Family::f);
    for (double z : {-0.7, 0.0, 0.25, 1.3}) {
        const Complex2 p{z, z};
        EXPECT_EQ(eval_map(f, p), p);
    }
}

TEST(EvalMap, HandValues) {
    const PolyMap2 f = builtin(Family::f);
    const Complex2 a = eval_map(f, {0.5, 0.0});
    EXPECT_EQ(a.z, cplx(0.25));
    EXPECT_EQ(a.w, cplx(0.0));
    const Complex2 b = eval_map(f, {0.3, 0.2});
    EXPECT_NEAR(std::abs(b.z - 0.27), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(b.w - 0.22), 0.0, 1e-15);
}

TEST(EvalMap, OriginFixedAndTangentToIdentity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const PolyMap2 m = random_map(rng, 2 + trial % 4);
        EXPECT_EQ(eval_map(m, {0.0, 0.0}), (Complex2{0.0, 0.0}));
        const double h = 1e-6;
        for (int col = 0; col < 2; ++col) {
            Complex2 plus{}, minus{};
            (col == 0 ? plus.z : plus.w) = h;
            (col == 0 ? minus.z : minus.w) = -h;
            const Complex2 fp = eval_map(m, plus), fm = eval_map(m, minus);
            const cplx d0 = (fp.z - fm.z) / (2 * h), d1 = (fp.w - fm.w) / (2 * h);
            EXPECT_NEAR(std::abs(d0 - (col == 0 ? 1.0 : 0.0)), 0.0, 1e-8);
            EXPECT_NEAR(std::abs(d1 - (col == 1 ? 1.0 : 0.0)), 0.0, 1e-8);
        }
    }
}

TEST(CompiledMap, AgreesWithEvalMap) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const PolyMap2 m = random_map(rng, 2 + trial % 5);
        const CompiledMap<cplx> cm(m);
        const Complex2 pt{rand_c(rng), rand_c(rng)};
        const Complex2 a = eval_map(m, pt), b = cm(pt);
        EXPECT_LE(std::abs(a.z - b.z) + std::abs(a.w - b.w), 1e-13);
    }
}

TEST(Order, Values) {
    EXPECT_EQ(order(builtin(Family::f)), 2);
    EXPECT_EQ(order(builtin(Family::g, 1.0, 3)), 2);
    const PolyMap2 m({{5, Component{HomPoly2(5, {1, 0, 0, 0, 0, 0}), HomPoly2::zero(5)}}});
    EXPECT_EQ(order(m), 5);
}

TEST(LinearChange, RejectsSingular) {
    EXPECT_THROW(LinearChange(1.0, 2.0, 2.0, 4.0), invalid_map);
    EXPECT_THROW(LinearChange(0.0, 0.0, 0.0, 0.0), invalid_map);
    EXPECT_NO_THROW(LinearChange(1.0, 2.0, 3.0, 4.0));
}

TEST(Conjugate, FToFtilde) {
    const PolyMap2 c = conjugate_linear(builtin(Family::f), LinearChange::diagonal_to_axis());
    ASSERT_EQ(c.components().size(), 1u);
    const Component P = c.component(2);
    // (-y^2, -xy): coefficients of x^2, xy, y^2.
    const std::vector<cplx> p{0.0, 0.0, -1.0}, q{0.0, -1.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        EXPECT_LE(std::abs(P.p.coeff(i) - p[i]), 1e-14);
        EXPECT_LE(std::abs(P.q.coeff(i) - q[i]), 1e-14);
    }
}

TEST(Conjugate, IdentityIsExact) {
    std::mt19937_64 rng(3);
    const PolyMap2 m = random_map(rng, 4);
    EXPECT_EQ(conjugate_linear(m, LinearChange::identity()), m);
}

TEST(Conjugate, RoundTripAndPointwise) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const PolyMap2 m = random_map(rng, 2 + trial % 4);
        LinearChange L(rand_c(rng) + 2.0, rand_c(rng), rand_c(rng), rand_c(rng) + 2.0);
        const PolyMap2 c = conjugate_linear(m, L);
        EXPECT_EQ(c.order(), m.order());

        // Independent route: evaluate L(f(L^-1 p)) pointwise.
        const Complex2 pt{rand_c(rng, 0.5), rand_c(rng, 0.5)};
        const Complex2 direct = L.apply(eval_map(m, L.inverse().apply(pt)));
        const Complex2 via = eval_map(c, pt);
        EXPECT_LE(std::abs(direct.z - via.z) + std::abs(direct.w - via.w), 1e-11);

        const PolyMap2 back = conjugate_linear(c, L.inverse());
        for (const auto& [j, comp] : m.components()) {
            const Component b = back.component(j);
            for (int i = 0; i <= j; ++i) {
                EXPECT_LE(std::abs(b.p.coeff(i) - comp.p.coeff(i)), 1e-12);
                EXPECT_LE(std::abs(b.q.coeff(i) - comp.q.coeff(i)), 1e-12);
            }
        }
    }
}
