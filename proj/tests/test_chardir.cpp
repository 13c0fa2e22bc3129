#include <gtest/gtest.h>

#include <random>

#include "parabolic/chardir.hpp"
#include "parabolic/parser.hpp"

using namespace parabolic;

namespace {

ProjDirection dir(cplx a, cplx b) { return ProjDirection::from(a, b); }

cplx rand_c(std::mt19937_64& rng, double r = 1.0) {
    std::uniform_real_distribution<double> u(-r, r);
    return {u(rng), u(rng)};
}

// Index of the report closest to v, or -1.
int find(const std::vector<CharDirReport>& reps, const ProjDirection& v) {
    for (std::size_t i = 0; i < reps.size(); ++i)
        if (chordal(reps[i].direction, v) < 1e-9)
            return static_cast<int>(i);
    return -1;
}

}  // namespace

TEST(ProjDirection, Canonical) {
    const ProjDirection d = dir(cplx(0.0, 2.0), cplx(0.0, 2.0));
    EXPECT_EQ(d.alpha, cplx(1.0));
    EXPECT_NEAR(std::abs(d.beta - 1.0), 0.0, 1e-15);
    const ProjDirection e = dir(0.5, cplx(0.0, -3.0));
    EXPECT_EQ(e.beta, cplx(1.0));
    EXPECT_NEAR(std::abs(e.alpha - cplx(0.0, 0.5 / 3.0)), 0.0, 1e-15);
    EXPECT_THROW(dir(0.0, 0.0), invalid_argument);
    EXPECT_NEAR(chordal(dir(1.0, 0.0), dir(0.0, 1.0)), 1.0, 1e-15);
    EXPECT_EQ(chordal(dir(2.0, 1.0), dir(4.0, 2.0)), 0.0);
}

TEST(RPolynomial, MainMap) {
    const HomPoly2 r = r_polynomial(builtin(Family::f).component(2));
    ASSERT_EQ(r.degree(), 3);
    // 2 z^2 w - 2 z w^2
    EXPECT_EQ(r.coeff(0), cplx(0.0));
    EXPECT_EQ(r.coeff(1), cplx(2.0));
    EXPECT_EQ(r.coeff(2), cplx(-2.0));
    EXPECT_EQ(r.coeff(3), cplx(0.0));
}

TEST(RPolynomial, Ftilde) {
    const HomPoly2 r = r_polynomial(builtin(Family::ftilde).component(2));
    // -x^2 y + y^3
    EXPECT_EQ(r.coeff(0), cplx(0.0));
    EXPECT_EQ(r.coeff(1), cplx(-1.0));
    EXPECT_EQ(r.coeff(2), cplx(0.0));
    EXPECT_EQ(r.coeff(3), cplx(1.0));
}

TEST(RPolynomial, Dicritical) {
    const Component P{HomPoly2(2, {1.0, 0.0, 0.0}), HomPoly2(2, {0.0, 1.0, 0.0})};
    EXPECT_TRUE(r_polynomial(P).is_zero());
    EXPECT_TRUE(proj_roots(r_polynomial(P)).dicritical);
    EXPECT_THROW(classify_directions(PolyMap2({{2, P}})), dicritical_error);
}

TEST(ProjRoots, MainMap) {
    const ProjRoots pr = proj_roots(HomPoly2(3, {0.0, 2.0, -2.0, 0.0}));
    ASSERT_FALSE(pr.dicritical);
    ASSERT_EQ(pr.roots.size(), 3u);
    for (const auto& v : {dir(1, 0), dir(0, 1), dir(1, 1)}) {
        int hits = 0;
        for (const auto& root : pr.roots)
            if (chordal(root.direction, v) < 1e-12) {
                ++hits;
                EXPECT_EQ(root.multiplicity, 1);
            }
        EXPECT_EQ(hits, 1);
    }
}

TEST(ProjRoots, Ftilde) {
    const ProjRoots pr = proj_roots(HomPoly2(3, {0.0, -1.0, 0.0, 1.0}));
    ASSERT_EQ(pr.roots.size(), 3u);
    for (const auto& v : {dir(1, 0), dir(1, 1), dir(1, -1)}) {
        bool hit = false;
        for (const auto& root : pr.roots)
            hit = hit || (chordal(root.direction, v) < 1e-12 && root.multiplicity == 1);
        EXPECT_TRUE(hit);
    }
}

TEST(ProjRoots, TripleRoot) {
    const ProjRoots pr = proj_roots(HomPoly2(3, {1.0, 0.0, 0.0, 0.0}));
    ASSERT_EQ(pr.roots.size(), 1u);
    EXPECT_EQ(pr.roots[0].multiplicity, 3);
    EXPECT_LT(chordal(pr.roots[0].direction, dir(0, 1)), 1e-12);
}

TEST(ProjRoots, ConstructedMultipleRoots) {
    // (w - 2z)^2 (w + i z)^3 (w - 0.5 z) z
    HomPoly2 p(0, {1.0});
    auto lin = [](cplx a, cplx b) { return HomPoly2(1, {a, b}); };
    for (int k = 0; k < 2; ++k)
        p = p * lin(-2.0, 1.0);
    for (int k = 0; k < 3; ++k)
        p = p * lin(cplx(0.0, 1.0), 1.0);
    p = p * lin(-0.5, 1.0) * lin(1.0, 0.0);
    const ProjRoots pr = proj_roots(p);
    int total = 0;
    for (const auto& root : pr.roots)
        total += root.multiplicity;
    EXPECT_EQ(total, 7);
    ASSERT_EQ(pr.roots.size(), 4u);
    auto mult_of = [&](ProjDirection v) {
        for (const auto& root : pr.roots)
            if (chordal(root.direction, v) < 1e-4)
                return root.multiplicity;
        return 0;
    };
    EXPECT_EQ(mult_of(dir(1, 2)), 2);
    EXPECT_EQ(mult_of(dir(1, cplx(0.0, -1.0))), 3);
    EXPECT_EQ(mult_of(dir(1, 0.5)), 1);
    EXPECT_EQ(mult_of(dir(0, 1)), 1);
}

TEST(ProjRoots, RandomResidualsAndCounts) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 8;
        std::vector<cplx> c;
        for (int i = 0; i <= d; ++i)
            c.push_back(rand_c(rng));
        if (trial % 5 == 0)
            c.back() = 0.0;  // root at [0:1]
        if (trial % 7 == 0 && trial % 5 != 0)
            c.front() = 0.0;  // root at [1:0]
        const HomPoly2 poly(d, c);
        const ProjRoots pr = proj_roots(poly);
        int total = 0;
        for (const auto& root : pr.roots) {
            total += root.multiplicity;
            const ProjDirection& v = root.direction;
            EXPECT_LE(std::abs(eval_hom(poly, {v.alpha, v.beta})), 1e-9 * poly.max_abs())
                << "trial " << trial;
        }
        EXPECT_EQ(total, d) << "trial " << trial;
    }
}

TEST(Parallel, RAgreesWithDeterminant) {
    std::mt19937_64 rng(123);
    const Component P = builtin(Family::g, cplx(0.3, 1.0), 2).component(2);
    const HomPoly2 r = r_polynomial(P);
    for (int i = 0; i < 10000; ++i) {
        const Complex2 v{rand_c(rng), rand_c(rng)};
        const cplx det = v.z * eval_hom(P.q, v) - v.w * eval_hom(P.p, v);
        EXPECT_NEAR(std::abs(eval_hom(r, v)), std::abs(det), 1e-12);
    }
}

TEST(Classify, MainMap) {
    const auto reps = classify_directions(builtin(Family::f));
    ASSERT_EQ(reps.size(), 3u);
    const int a = find(reps, dir(1, 0)), b = find(reps, dir(0, 1)), c = find(reps, dir(1, 1));
    ASSERT_GE(a, 0);
    ASSERT_GE(b, 0);
    ASSERT_GE(c, 0);
    EXPECT_FALSE(reps[a].degenerate);
    EXPECT_FALSE(reps[b].degenerate);
    EXPECT_TRUE(reps[c].degenerate);
    EXPECT_NEAR(std::abs(reps[a].lambda - -1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(reps[b].lambda - -1.0), 0.0, 1e-14);
    ASSERT_TRUE(reps[a].director && reps[b].director);
    EXPECT_NEAR(std::abs(*reps[a].director - -2.0), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(*reps[b].director - -2.0), 0.0, 1e-9);
    EXPECT_FALSE(reps[c].director);
}

TEST(Classify, Ftilde) {
    const auto reps = classify_directions(builtin(Family::ftilde));
    ASSERT_EQ(reps.size(), 3u);
    const int a = find(reps, dir(1, 1)), b = find(reps, dir(1, -1)), c = find(reps, dir(1, 0));
    ASSERT_GE(a, 0);
    ASSERT_GE(b, 0);
    ASSERT_GE(c, 0);
    EXPECT_FALSE(reps[a].degenerate);
    EXPECT_FALSE(reps[b].degenerate);
    EXPECT_TRUE(reps[c].degenerate);
    EXPECT_NEAR(std::abs(*reps[a].director - -2.0), 0.0, 1e-9);
}

TEST(Classify, MixedDegreeMap) {
    // (z - z^2, w - w^3): quadratic part (-z^2, 0), so r = z^2 w.
    const PolyMap2 m = parse_map("(z - z^2, w - w^3)");
    const auto reps = classify_directions(m);
    ASSERT_EQ(reps.size(), 2u);
    const int a = find(reps, dir(1, 0)), b = find(reps, dir(0, 1));
    ASSERT_GE(a, 0);
    ASSERT_GE(b, 0);
    // [1:0] is a simple root of z^2 w with lambda = p(1,0) = -1.
    EXPECT_EQ(reps[a].multiplicity, 1);
    EXPECT_FALSE(reps[a].degenerate);
    EXPECT_NEAR(std::abs(reps[a].lambda - -1.0), 0.0, 1e-14);
    // [0:1] is a double root with q(0,1) = 0.
    EXPECT_EQ(reps[b].multiplicity, 2);
    EXPECT_TRUE(reps[b].degenerate);
}

TEST(Classify, MultiplicitiesSumToDegree) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 4;
        std::vector<cplx> p, q;
        for (int i = 0; i <= d; ++i) {
            p.push_back(rand_c(rng));
            q.push_back(rand_c(rng));
        }
        const auto reps = classify_directions(PolyMap2({{d, Component{HomPoly2(d, p), HomPoly2(d, q)}}}));
        int total = 0;
        for (const auto& r : reps)
            total += r.multiplicity;
        EXPECT_EQ(total, d + 1);
    }
}

TEST(Director, Values) {
    const PolyMap2 f = builtin(Family::f);
    EXPECT_NEAR(std::abs(director(f, dir(1, 0)) - -2.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(director(f, dir(0, 1)) - -2.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(director(builtin(Family::ftilde), dir(1, 1)) - -2.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(director(builtin(Family::ftilde), dir(1, -1)) - -2.0), 0.0, 1e-12);
}

TEST(Director, Errors) {
    EXPECT_THROW(director(builtin(Family::f), dir(1, 1)), undefined_director);
    EXPECT_THROW(director(builtin(Family::f), dir(1, 2)), undefined_director);
    const PolyMap2 cubic({{3, Component{HomPoly2(3, {-1.0, 0.0, 0.0, 0.0}), HomPoly2(3, {0.0, 0.0, 0.0, 1.0})}}});
    EXPECT_THROW(director(cubic, dir(1, 0)), undefined_director);
}

TEST(Director, ConjugationInvariance) {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<cplx> p, q;
        for (int i = 0; i <= 2; ++i) {
            p.push_back(rand_c(rng));
            q.push_back(rand_c(rng));
        }
        const PolyMap2 m({{2, Component{HomPoly2(2, p), HomPoly2(2, q)}}});
        const LinearChange L(rand_c(rng) + 1.5, rand_c(rng), rand_c(rng), rand_c(rng) + 1.5);
        const PolyMap2 c = conjugate_linear(m, L);
        for (const auto& rep : classify_directions(m)) {
            if (!rep.director)
                continue;
            const Complex2 img = L.apply({rep.direction.alpha, rep.direction.beta});
            const cplx d2 = director(c, dir(img.z, img.w));
            EXPECT_LE(std::abs(d2 - *rep.director), 1e-8 * std::max(1.0, std::abs(*rep.director)));
            ++checked;
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(Degreewise, GFamily) {
    const DegreewiseStatus st = degreewise(builtin(Family::g, 1.0, 3), dir(1, 0));
    ASSERT_EQ(st.per_degree.size(), 3u);
    for (const auto& d : st.per_degree)
        EXPECT_TRUE(d.is_char_dir);
    EXPECT_TRUE(st.per_degree[0].degenerate);
    EXPECT_TRUE(st.per_degree[1].degenerate);
    EXPECT_FALSE(st.per_degree[2].degenerate);
    ASSERT_TRUE(st.r_plus_1);
    EXPECT_EQ(*st.r_plus_1, 4);
    EXPECT_EQ(st.lambda_at_r_plus_1, cplx(1.0));
    EXPECT_EQ(st.s_truncated, 4);
    EXPECT_TRUE(st.through_top);
}

TEST(Degreewise, FtildeAndH) {
    const DegreewiseStatus a = degreewise(builtin(Family::ftilde), dir(1, 0));
    ASSERT_EQ(a.per_degree.size(), 1u);
    EXPECT_TRUE(a.per_degree[0].degenerate);
    EXPECT_FALSE(a.r_plus_1);

    const DegreewiseStatus b = degreewise(builtin(Family::h, 0.1), dir(1, 0));
    ASSERT_TRUE(b.r_plus_1);
    EXPECT_EQ(*b.r_plus_1, 3);
    EXPECT_NEAR(std::abs(b.lambda_at_r_plus_1 - 0.1), 0.0, 1e-15);
}

TEST(Degreewise, ChainBreaks) {
    // [1:0] is characteristic for the quadratic part but not for (0, z^3).
    const PolyMap2 m = parse_map("(x - y^2, y - x*y + x^3)");
    const DegreewiseStatus st = degreewise(m, dir(1, 0));
    EXPECT_EQ(st.s_truncated, 2);
    EXPECT_FALSE(st.through_top);
    EXPECT_FALSE(st.r_plus_1);
}

TEST(Beta, Examples) {
    const auto b = beta_branch(-1.0, 2);
    ASSERT_TRUE(b);
    EXPECT_NEAR(std::abs(*b - std::sqrt(0.5)), 0.0, 1e-15);
    EXPECT_FALSE(beta_branch(1.0, 2));
    const auto c = beta_branch(1.0, 3);
    ASSERT_TRUE(c);
    EXPECT_NEAR(c->real(), std::cbrt(1.0 / 3.0) * 0.5, 1e-14);
    EXPECT_GT(c->imag(), 0.0);  // +-pi/3 tie goes to the non-negative argument
    EXPECT_NEAR(std::abs(std::pow(*c, -3) - cplx(-3.0)), 0.0, 1e-12);
    EXPECT_THROW(beta_branch(0.0, 3), invalid_argument);
}

TEST(Beta, PresenceTable) {
    std::mt19937_64 rng(55);
    for (int i = 0; i < 100; ++i) {
        cplx a = rand_c(rng, 5.0);
        if (a.imag() == 0.0 && a.real() >= 0.0)
            a = -a - 1.0;
        EXPECT_TRUE(beta_branch(a, 2)) << a;
    }
    for (int r = 3; r <= 8; ++r)
        for (int i = 0; i < 100; ++i) {
            const cplx a = rand_c(rng, 5.0);
            const auto b = beta_branch(a, r);
            ASSERT_TRUE(b) << a << " r=" << r;
            EXPECT_NEAR(std::abs(std::pow(*b, -r) + a * static_cast<double>(r)), 0.0,
                        1e-10 * std::abs(a) * r);
        }
    for (int i = 1; i <= 50; ++i)
        EXPECT_FALSE(beta_branch(0.1 * i, 2));
    EXPECT_TRUE(beta_branch(-0.5, 2));
}
