#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "chardir.hpp"
#include "oracle.hpp"
#include "orbit.hpp"
#include "parser.hpp"
#include "render.hpp"

namespace parabolic {

using ordered_json = nlohmann::ordered_json;

struct Failure {
    ordered_json point;
    ordered_json observed;
    ordered_json expected;
};

/// Outcome of one experiment. verdict is "pass", "fail" or "evidence";
/// it is "fail" exactly when failures is non-empty.
struct ExperimentReport {
    std::string id;
    std::uint64_t seed = 0;
    ordered_json params = ordered_json::object();
    std::string verdict = "pass";
    std::vector<Failure> failures;
    ordered_json stats = ordered_json::object();

    bool passed() const { return verdict != "fail"; }
};

inline ordered_json to_json(const ExperimentReport& r) {
    ordered_json j;
    j["id"] = r.id;
    j["seed"] = r.seed;
    j["params"] = r.params;
    j["verdict"] = r.verdict;
    j["failures"] = ordered_json::array();
    for (const auto& f : r.failures)
        j["failures"].push_back({{"point", f.point}, {"observed", f.observed}, {"expected", f.expected}});
    j["stats"] = r.stats;
    return j;
}

inline ordered_json point_json(Complex2 p) { return {p.z.real(), p.z.imag(), p.w.real(), p.w.imag()}; }
inline ordered_json complex_json(cplx c) { return {c.real(), c.imag()}; }

/// Run fn(i) for i in [0, n) on a small thread pool; the first exception is
/// rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
    const std::size_t t = std::min<std::size_t>(resolve_threads(threads), n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first)
                    first = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t k = 1; k < t; ++k)
            pool.emplace_back(worker);
        worker();
    }
    if (first)
        std::rethrow_exception(first);
}

namespace detail {

constexpr std::size_t max_recorded_failures = 50;

/// Collects failures in sample order, keeping the first few in full.
struct FailureLog {
    long long count = 0;
    std::vector<Failure> kept;

    void add(Failure f) {
        ++count;
        if (kept.size() < max_recorded_failures)
            kept.push_back(std::move(f));
    }
};

inline void finish(ExperimentReport& rep, FailureLog& log) {
    rep.failures = std::move(log.kept);
    rep.stats["violations"] = log.count;
    rep.verdict = rep.failures.empty() ? "pass" : "fail";
}

inline void require(bool ok, const std::string& what) {
    if (!ok)
        throw invalid_argument(what);
}

/// Uniform point of A = {z > 0, w > 0, z + w < 1}, kept margin away from
/// its boundary.
inline Complex2 sample_region_a(std::mt19937_64& rng, double margin = 1e-12) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    return {margin + (1.0 - 3.0 * margin) * a, margin + (1.0 - 3.0 * margin) * b};
}

/// Uniform point of the disk |c| < radius.
inline cplx sample_disk(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    const double th = 2.0 * std::numbers::pi * u(rng);
    return std::polar(r, th);
}

inline double min_residual(Complex2 p) {
    const auto r = preimage_residuals(p);
    return *std::min_element(r.begin(), r.end());
}

inline ordered_json class_counts(const std::vector<OrbitClass>& cls) {
    std::array<long long, 4> c{};
    for (auto k : cls)
        ++c[static_cast<std::size_t>(k)];
    ordered_json j;
    for (std::size_t k = 0; k < 4; ++k)
        j[class_name(all_classes[k])] = c[k];
    return j;
}

}  // namespace detail

/// f with one quadratic coefficient shifted: index 0..2 are the z^2, zw, w^2
/// coefficients of p, 3..5 those of q.
inline PolyMap2 mutated_f(int index, double delta = 0.1) {
    if (index < 0 || index > 5)
        throw invalid_argument("mutated_f: coefficient index must be in 0..5");
    const Component c = builtin(Family::f).component(2);
    std::vector<cplx> p(c.p.coeffs().begin(), c.p.coeffs().end());
    std::vector<cplx> q(c.q.coeffs().begin(), c.q.coeffs().end());
    (index < 3 ? p[static_cast<std::size_t>(index)] : q[static_cast<std::size_t>(index - 3)]) += delta;
    return PolyMap2({{2, Component{HomPoly2(2, p), HomPoly2(2, q)}}});
}

// --- E1: one-step invariance of A ----------------------------------------------

struct E1Params {
    std::uint64_t seed = 1;
    long long n_samples = 1'000'000;
    /// Steps checked per sample (each step must map A into A).
    long long horizon = 1;
};

inline ExperimentReport e1_region_a(const E1Params& prm = {}, const PolyMap2& map = builtin(Family::f)) {
    detail::require(prm.n_samples >= 0 && prm.horizon >= 1, "E1: n_samples >= 0 and horizon >= 1 required");
    ExperimentReport rep{"E1", prm.seed};
    rep.params = {{"n_samples", prm.n_samples}, {"horizon", prm.horizon}, {"map", format_map(map, Chart::zw)}};
    std::mt19937_64 rng(prm.seed);
    const CompiledMap<cplx> f(map);
    auto ws = f.make_workspace();
    detail::FailureLog log;
    double max_sum_increase = -std::numeric_limits<double>::infinity();
    for (long long s = 0; s < prm.n_samples; ++s) {
        const Complex2 start = detail::sample_region_a(rng);
        Complex2 p = start;
        for (long long k = 0; k < prm.horizon; ++k) {
            const Complex2 q = f(p, ws);
            const double z = p.z.real(), w = p.w.real();
            const double z1 = q.z.real(), w1 = q.w.real();
            // z1 + w1 = z + w - (z-w)^2 exactly; allow the rounding of the two sums.
            const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (z + w);
            max_sum_increase = std::max(max_sum_increase, (z1 + w1) - (z + w));
            std::string broken;
            if (!(z1 > 0.0))
                broken = "z1 > 0";
            else if (!(w1 > 0.0))
                broken = "w1 > 0";
            else if (!(z1 + w1 < 1.0))
                broken = "z1 + w1 < 1";
            else if (!(z1 + w1 <= z + w + slack))
                broken = "z1 + w1 <= z + w";
            if (!broken.empty()) {
                log.add({point_json(start), {{"step", k + 1}, {"z1", z1}, {"w1", w1}, {"sum", z1 + w1}, {"prev_sum", z + w}},
                         broken});
                break;
            }
            p = q;
        }
    }
    rep.stats["max_sum_increase"] = max_sum_increase;
    detail::finish(rep, log);
    return rep;
}

// --- E2: |1/(z_n - w_n)| > |1/(z - w)| + n --------------------------------------

struct E2Params {
    std::uint64_t seed = 1;
    long long n_samples = 1000;
    long long horizon = 10000;
    unsigned threads = 0;
};

inline ExperimentReport e2_growth(const E2Params& prm = {}, const PolyMap2& map = builtin(Family::f)) {
    detail::require(prm.n_samples >= 0 && prm.horizon >= 1, "E2: n_samples >= 0 and horizon >= 1 required");
    ExperimentReport rep{"E2", prm.seed};
    rep.params = {{"n_samples", prm.n_samples}, {"horizon", prm.horizon}, {"map", format_map(map, Chart::zw)}};
    std::mt19937_64 rng(prm.seed);
    std::vector<Complex2> starts;
    while (static_cast<long long>(starts.size()) < prm.n_samples) {
        const Complex2 s = detail::sample_region_a(rng);
        if (s.z != s.w)
            starts.push_back(s);
    }
    const CompiledMap<cplx> f(map);
    std::vector<std::optional<Failure>> result(starts.size());
    std::vector<double> min_margin(starts.size(), std::numeric_limits<double>::infinity());
    parallel_for(starts.size(), prm.threads, [&](std::size_t i) {
        auto ws = f.make_workspace();
        Complex2 p = starts[i];
        const double v0 = 1.0 / std::abs(p.z - p.w);
        for (long long n = 1; n <= prm.horizon; ++n) {
            p = f(p, ws);
            const double vn = 1.0 / std::abs(p.z - p.w);
            const double bound = v0 + static_cast<double>(n);
            if (std::isfinite(vn))
                min_margin[i] = std::min(min_margin[i], vn - bound);
            if (!(vn > bound)) {
                result[i] = Failure{point_json(starts[i]), {{"n", n}, {"abs_v_n", vn}}, {{"greater_than", bound}}};
                return;
            }
        }
    });
    detail::FailureLog log;
    for (auto& r : result)
        if (r)
            log.add(std::move(*r));
    rep.stats["min_margin"] = *std::min_element(min_margin.begin(), min_margin.end());
    detail::finish(rep, log);
    return rep;
}

// --- E3: n |z_n - w_n| < 1 ------------------------------------------------------

enum class RateCheck { ok, boundary, violation };

/// Strict bound n * gap < 1; products within a few ulps of 1 are the
/// equality (boundary) case, which the strict bound also rejects.
inline RateCheck check_rate(long long n, double gap) {
    const double v = static_cast<double>(n) * gap;
    if (std::abs(v - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon())
        return RateCheck::boundary;
    return v < 1.0 ? RateCheck::ok : RateCheck::violation;
}

struct E3Params {
    std::uint64_t seed = 1;
    long long n_samples = 100;
    long long horizon = 100000;
    /// Samples re-run in 256-bit arithmetic.
    long long oracle_samples = 2;
    unsigned threads = 0;
};

inline ExperimentReport e3_rate(const E3Params& prm = {}, const PolyMap2& map = builtin(Family::f)) {
    detail::require(prm.n_samples >= 0 && prm.horizon >= 1 && prm.oracle_samples >= 0,
                    "E3: n_samples, oracle_samples >= 0 and horizon >= 1 required");
    ExperimentReport rep{"E3", prm.seed};
    rep.params = {{"n_samples", prm.n_samples},
                  {"horizon", prm.horizon},
                  {"oracle_samples", prm.oracle_samples},
                  {"map", format_map(map, Chart::zw)}};
    std::mt19937_64 rng(prm.seed);
    std::vector<Complex2> starts;
    for (long long s = 0; s < prm.n_samples; ++s)
        starts.push_back(detail::sample_region_a(rng));

    struct Result {
        std::optional<Failure> failure;
        bool boundary = false;
        double sup = 0.0;
    };
    const CompiledMap<cplx> f(map);
    std::vector<Result> res(starts.size());
    parallel_for(starts.size(), prm.threads, [&](std::size_t i) {
        auto ws = f.make_workspace();
        Complex2 p = starts[i];
        for (long long n = 1; n <= prm.horizon; ++n) {
            p = f(p, ws);
            const double gap = std::abs(p.z - p.w);
            res[i].sup = std::max(res[i].sup, n * gap);
            const RateCheck c = check_rate(n, gap);
            if (c != RateCheck::ok) {
                res[i].boundary = c == RateCheck::boundary;
                res[i].failure = Failure{point_json(starts[i]),
                                         {{"n", n}, {"n_gap", n * gap}, {"boundary", res[i].boundary}},
                                         "n |z_n - w_n| < 1"};
                return;
            }
        }
    });

    // Independent 256-bit re-run: the bound must hold there too, and the
    // sup of n * gap must agree with the double run.
    const long long n_oracle = std::min<long long>(prm.oracle_samples, static_cast<long long>(starts.size()));
    std::vector<std::optional<Failure>> ores(static_cast<std::size_t>(n_oracle));
    std::vector<double> odiff(static_cast<std::size_t>(n_oracle), 0.0);
    const CompiledMap<oracle_complex> fo(map);
    parallel_for(static_cast<std::size_t>(n_oracle), prm.threads, [&](std::size_t i) {
        auto ws = fo.make_workspace();
        OraclePoint p = to_oracle(starts[i]);
        double sup = 0.0;
        for (long long n = 1; n <= prm.horizon; ++n) {
            p = fo(p, ws);
            const oracle_complex d = p.z - p.w;
            const oracle_real ng = static_cast<double>(n) * abs(d);
            const double v = ng.convert_to<double>();
            sup = std::max(sup, v);
            if (!(ng < 1)) {
                ores[i] = Failure{point_json(starts[i]), {{"n", n}, {"oracle_n_gap", v}}, "n |z_n - w_n| < 1 (256-bit)"};
                break;
            }
        }
        odiff[i] = std::abs(sup - res[i].sup);
    });

    detail::FailureLog log;
    long long boundary = 0;
    double sup = 0.0;
    for (auto& r : res) {
        sup = std::max(sup, r.sup);
        boundary += r.boundary;
        if (r.failure)
            log.add(std::move(*r.failure));
    }
    for (auto& r : ores)
        if (r)
            log.add(std::move(*r));
    rep.stats["sup_n_gap"] = sup;
    rep.stats["boundary_cases"] = boundary;
    rep.stats["oracle_samples"] = n_oracle;
    rep.stats["oracle_max_sup_difference"] = odiff.empty() ? 0.0 : *std::max_element(odiff.begin(), odiff.end());
    detail::finish(rep, log);
    return rep;
}

// --- E4: A-orbits do not converge to the origin -----------------------------------

struct E4Params {
    std::uint64_t seed = 1;
    long long n_samples = 200;
    long long horizon = 100000;
    unsigned threads = 0;
    /// Extra starts checked in addition to the random ones.
    std::vector<Complex2> extra_starts;
};

inline ExperimentReport e4_no_origin_in_a(const E4Params& prm = {}, const PolyMap2& map = builtin(Family::f)) {
    detail::require(prm.n_samples >= 0 && prm.horizon >= 64, "E4: n_samples >= 0 and horizon >= 64 required");
    ExperimentReport rep{"E4", prm.seed};
    rep.params = {{"n_samples", prm.n_samples}, {"horizon", prm.horizon}, {"map", format_map(map, Chart::zw)}};
    std::mt19937_64 rng(prm.seed);
    std::vector<Complex2> starts;
    for (long long s = 0; s < prm.n_samples; ++s)
        starts.push_back(detail::sample_region_a(rng));
    starts.insert(starts.end(), prm.extra_starts.begin(), prm.extra_starts.end());

    OrbitParams op;
    op.max_iter = prm.horizon;
    const OrbitClassifier<cplx> classifier(map, op);
    const CompiledMap<cplx> f(map);
    struct Result {
        OrbitClass cls{};
        std::vector<Failure> failures;
        double product_defect = 0.0;
    };
    std::vector<Result> res(starts.size());
    parallel_for(starts.size(), prm.threads, [&](std::size_t i) {
        const Complex2 s = starts[i];
        const OrbitOutcome o = classifier.classify(s);
        res[i].cls = o.cls;
        if (o.cls == OrbitClass::converges_to_origin)
            res[i].failures.push_back({point_json(s), {{"class", class_name(o.cls)}, {"n", o.iterations_used}},
                                       "no convergence to the origin"});

        // The smaller coordinate never decreases, and the coordinates follow
        // z_n = z prod (1 - (z_j - w_j)), w_n = w prod (1 + (z_j - w_j)).
        auto ws = f.make_workspace();
        Complex2 p = s;
        const bool z_small = s.z.real() <= s.w.real();
        const double mono_ref = z_small ? s.z.real() : s.w.real();
        double pz = 1.0, pw = 1.0;
        for (long long n = 1; n <= prm.horizon; ++n) {
            const double d = (p.z - p.w).real();
            pz *= 1.0 - d;
            pw *= 1.0 + d;
            p = f(p, ws);
            const double cur = z_small ? p.z.real() : p.w.real();
            if (cur < mono_ref - 1e-15) {
                res[i].failures.push_back({point_json(s), {{"n", n}, {"coordinate", cur}},
                                           {{"at_least", mono_ref}, {"rule", "monotone smaller coordinate"}}});
                break;
            }
            const double ez = std::abs(p.z.real() - s.z.real() * pz) / std::max(std::abs(p.z.real()), 1e-300);
            const double ew = std::abs(p.w.real() - s.w.real() * pw) / std::max(std::abs(p.w.real()), 1e-300);
            res[i].product_defect = std::max({res[i].product_defect, ez, ew});
            if (!(ez <= 1e-9 && ew <= 1e-9)) {
                res[i].failures.push_back({point_json(s), {{"n", n}, {"z_defect", ez}, {"w_defect", ew}},
                                           {{"at_most", 1e-9}, {"rule", "product form of z_n, w_n"}}});
                break;
            }
            if (!std::isfinite(p.z.real()) || !std::isfinite(p.w.real()))
                break;
        }
    });

    detail::FailureLog log;
    std::vector<OrbitClass> cls;
    double defect = 0.0;
    for (auto& r : res) {
        cls.push_back(r.cls);
        defect = std::max(defect, r.product_defect);
        for (auto& f : r.failures)
            log.add(std::move(f));
    }
    rep.stats["classes"] = detail::class_counts(cls);
    rep.stats["max_product_defect"] = defect;
    detail::finish(rep, log);
    return rep;
}

// --- E5: no domain of attraction for f in a small bidisk --------------------------

struct E5Params {
    std::uint64_t seed = 1;
    long long n_samples = 10000;
    double eps = 0.125;
    long long horizon = 100000;
    /// Samples whose partial products are monitored.
    long long product_samples = 100;
    /// Samples compared against the 256-bit classifier.
    long long oracle_samples = 10;
    long long oracle_horizon = 10000;
    double residual_threshold = 1e-6;
    unsigned threads = 0;
    /// Explicit starts, run without the sampling-time residual rejection.
    std::vector<Complex2> extra_starts;
};

inline ExperimentReport e5_no_domain_f(const E5Params& prm = {}) {
    detail::require(prm.n_samples >= 0 && prm.eps > 0.0 && prm.horizon >= 64 && prm.oracle_horizon >= 64 &&
                        prm.product_samples >= 0 && prm.oracle_samples >= 0,
                    "E5: invalid parameters");
    const PolyMap2 map = builtin(Family::f);
    ExperimentReport rep{"E5", prm.seed};
    rep.params = {{"n_samples", prm.n_samples},         {"eps", prm.eps},
                  {"horizon", prm.horizon},             {"product_samples", prm.product_samples},
                  {"oracle_samples", prm.oracle_samples}, {"oracle_horizon", prm.oracle_horizon},
                  {"residual_threshold", prm.residual_threshold}};

    std::mt19937_64 rng(prm.seed);
    std::vector<Complex2> starts;
    long long rejected = 0;
    while (static_cast<long long>(starts.size()) < prm.n_samples) {
        const Complex2 s{detail::sample_disk(rng, prm.eps), detail::sample_disk(rng, prm.eps)};
        if ((s.z == cplx{} && s.w == cplx{}) || detail::min_residual(s) < prm.residual_threshold) {
            ++rejected;
            continue;
        }
        starts.push_back(s);
    }
    const std::size_t n_random = starts.size();
    starts.insert(starts.end(), prm.extra_starts.begin(), prm.extra_starts.end());

    OrbitParams op;
    op.max_iter = prm.horizon;
    const OrbitClassifier<cplx> classifier(map, op);
    const CompiledMap<cplx> f(map);

    // Smallest preimage residual along the first n+1 points of the orbit.
    auto orbit_min_residual = [&](Complex2 p, long long n) {
        auto ws = f.make_workspace();
        double m = detail::min_residual(p);
        for (long long k = 0; k < n; ++k) {
            p = f(p, ws);
            m = std::min(m, detail::min_residual(p));
        }
        return m;
    };

    struct Result {
        OrbitClass cls{};
        bool excluded = false;
        std::optional<Failure> failure;
    };
    std::vector<Result> res(starts.size());
    parallel_for(starts.size(), prm.threads, [&](std::size_t i) {
        const OrbitOutcome o = classifier.classify(starts[i]);
        res[i].cls = o.cls;
        if (o.cls != OrbitClass::converges_to_origin)
            return;
        // Origin convergence needs an exact hit of z_j - w_j = +-1; near
        // hits are excluded rather than counted against the claim.
        const double m = orbit_min_residual(starts[i], o.iterations_used);
        if (m < prm.residual_threshold) {
            res[i].excluded = true;
            return;
        }
        res[i].failure = Failure{point_json(starts[i]),
                                 {{"class", class_name(o.cls)}, {"n", o.iterations_used}, {"min_residual", m}},
                                 "no convergence to the origin"};
    });

    // Partial products: log|z_n/z| = sum log|1 - d_j|, log|w_n/w| = sum log|1 + d_j|.
    // Both tending to -infinity would mean the orbit converges to the origin.
    const std::size_t n_prod = std::min<std::size_t>(static_cast<std::size_t>(prm.product_samples), n_random);
    struct ProdResult {
        bool skipped = false;
        double min_lz = 0.0, min_lw = 0.0;
        std::optional<Failure> failure;
    };
    std::vector<ProdResult> pres(n_prod);
    parallel_for(n_prod, prm.threads, [&](std::size_t i) {
        auto ws = f.make_workspace();
        Complex2 p = starts[i];
        double lz = 0.0, lw = 0.0;
        for (long long n = 0; n < prm.horizon; ++n) {
            if (detail::min_residual(p) < prm.residual_threshold) {
                pres[i].skipped = true;
                return;
            }
            if (norm(p) > op.escape_radius)
                break;
            const cplx d = p.z - p.w;
            lz += std::log(std::abs(1.0 - d));
            lw += std::log(std::abs(1.0 + d));
            pres[i].min_lz = std::min(pres[i].min_lz, lz);
            pres[i].min_lw = std::min(pres[i].min_lw, lw);
            p = f(p, ws);
        }
        if (pres[i].min_lz < -20.0 && pres[i].min_lw < -20.0)
            pres[i].failure = Failure{point_json(starts[i]),
                                      {{"min_log_z_ratio", pres[i].min_lz}, {"min_log_w_ratio", pres[i].min_lw}},
                                      "at most one of log|z_n/z|, log|w_n/w| below -20"};
    });

    // Double versus 256-bit classification at a shorter horizon.
    const std::size_t n_or = std::min<std::size_t>(static_cast<std::size_t>(prm.oracle_samples), n_random);
    OrbitParams oop;
    oop.max_iter = prm.oracle_horizon;
    const OrbitClassifier<cplx> short_classifier(map, oop);
    const OrbitClassifier<oracle_complex> oracle(map, oop);
    std::vector<std::optional<Failure>> ores(n_or);
    std::vector<int> ocompared(n_or, 0);
    parallel_for(n_or, prm.threads, [&](std::size_t i) {
        const OrbitClass a = short_classifier.classify(starts[i]).cls;
        const OrbitClass b = oracle.classify(to_oracle(starts[i])).cls;
        if (a == OrbitClass::indeterminate || b == OrbitClass::indeterminate)
            return;
        ocompared[i] = 1;
        if (a != b)
            ores[i] = Failure{point_json(starts[i]), {{"double", class_name(a)}}, {{"oracle", class_name(b)}}};
    });

    detail::FailureLog log;
    std::vector<OrbitClass> cls;
    long long excluded = 0;
    for (auto& r : res) {
        cls.push_back(r.cls);
        excluded += r.excluded;
        if (r.failure)
            log.add(std::move(*r.failure));
    }
    long long skipped = 0;
    double min_lz = 0.0, min_lw = 0.0;
    for (auto& r : pres) {
        skipped += r.skipped;
        min_lz = std::min(min_lz, r.min_lz);
        min_lw = std::min(min_lw, r.min_lw);
        if (r.failure)
            log.add(std::move(*r.failure));
    }
    long long compared = 0;
    for (std::size_t i = 0; i < n_or; ++i) {
        compared += ocompared[i];
        if (ores[i])
            log.add(std::move(*ores[i]));
    }
    rep.stats["classes"] = detail::class_counts(cls);
    rep.stats["rejected_at_sampling"] = rejected;
    rep.stats["excluded_near_preimage"] = excluded;
    rep.stats["product_samples_checked"] = static_cast<long long>(n_prod) - skipped;
    rep.stats["min_log_z_ratio"] = min_lz;
    rep.stats["min_log_w_ratio"] = min_lw;
    rep.stats["oracle_compared"] = compared;
    detail::finish(rep, log);
    return rep;
}

// --- E6: the g family has a domain of attraction along [1:0] -------------------------

struct E6Params {
    cplx a = 1.0;
    int r = 3;
    std::uint64_t seed = 1;
    long long horizon = 1'000'000;
    /// Fit window [fit_lo, horizon].
    long long fit_lo = 10000;
    int grid = 20;
    unsigned threads = 0;
};

struct E6Orbit {
    Complex2 start;
    bool attracted = false;
    bool escaped = false;
    double abs_x_end = 0.0;
    double log_ratio_end = 0.0;  // log |y_N / x_N|
    double slope = 0.0;
    double ratio = 0.0;
};

/// Iterate g = (x - y^2 + a x^(r+1), y - x y) from start. The second
/// coordinate satisfies y_{n+1} = y_n (1 - x_n) exactly, so it is carried as
/// L_n = log y_n: |y_n| falls like exp(-c n^(1-1/r)), far below any
/// floating-point range, while x only feels y^2 = exp(2 L).
inline E6Orbit e6_orbit(Complex2 start, const E6Params& prm, cplx beta, std::vector<double>& abs_x,
                        std::vector<double>& log_y) {
    E6Orbit out{start};
    const auto N = static_cast<std::size_t>(prm.horizon);
    abs_x.assign(N + 1, 0.0);
    log_y.assign(N + 1, 0.0);
    using T = scalar_traits<cplx>;
    cplx x = start.z;
    cplx L = std::log(start.w);
    const double log_escape = std::log(5.0);
    for (std::size_t n = 0;; ++n) {
        abs_x[n] = std::abs(x);
        log_y[n] = L.real();
        if (!(abs_x[n] <= 5.0) || !(L.real() <= log_escape)) {
            out.escaped = true;
            return out;
        }
        if (n == N)
            break;
        cplx xr = x;  // x^(r+1)
        for (int k = 0; k < prm.r; ++k)
            xr = T::mul(xr, x);
        const cplx one_minus_x = 1.0 - x;
        if (one_minus_x == cplx{}) {
            out.escaped = true;  // y lands on 0: not an orbit of interest
            return out;
        }
        if (L.real() > -400.0) {
            const cplx y2 = std::exp(2.0 * L);
            L += std::log(one_minus_x);
            x = x - y2 + T::mul(prm.a, xr);
        } else {
            // y^2 has underflowed; only |y| is still observed.
            L += 0.5 * std::log1p(T::norm(x) - 2.0 * x.real());
            x = x + T::mul(prm.a, xr);
        }
    }
    out.abs_x_end = abs_x[N];
    out.log_ratio_end = log_y[N] - std::log(abs_x[N]);
    out.attracted = abs_x[N] > 0.0 && abs_x[N] < 0.1 && abs_x[N] < abs_x[N / 10] && out.log_ratio_end < std::log(1e-6);
    if (out.attracted) {
        out.slope = rate_fit_power(abs_x, prm.fit_lo, prm.horizon);
        out.ratio = rate_fit_stretched_log(log_y, prm.r, beta, prm.fit_lo, prm.horizon);
    }
    return out;
}

inline ExperimentReport e6_g_attraction(const E6Params& prm = {}) {
    const PolyMap2 g = builtin(Family::g, prm.a, prm.r);  // enforces the family hypotheses
    detail::require(prm.grid >= 1 && prm.fit_lo >= 1 && prm.horizon > prm.fit_lo,
                    "E6: grid >= 1 and 1 <= fit_lo < horizon required");
    const auto beta = beta_branch(prm.a, prm.r);
    if (!beta)
        throw family_error("E6: no branch of (-a r)^(-1/r) with positive real part");
    ExperimentReport rep{"E6", prm.seed};
    rep.params = {{"a", complex_json(prm.a)}, {"r", prm.r},       {"horizon", prm.horizon},
                  {"fit_lo", prm.fit_lo},     {"grid", prm.grid}, {"map", format_map(g, Chart::xy)}};

    // Starts x0 along beta with |x0| in [0.05, 0.2], y0 = u x0 with u in
    // [1e-6, 1e-2]. Smaller |x0| spend ~1/(r |a| |x0|^r) steps in a transient,
    // longer than the fit window starts.
    const cplx dir = *beta / std::abs(*beta);
    std::vector<Complex2> starts;
    for (int i = 0; i < prm.grid; ++i)
        for (int j = 0; j < prm.grid; ++j) {
            const double t = prm.grid > 1 ? static_cast<double>(i) / (prm.grid - 1) : 0.0;
            const double s = prm.grid > 1 ? static_cast<double>(j) / (prm.grid - 1) : 0.0;
            const cplx x0 = 0.05 * std::pow(4.0, t) * dir;
            starts.push_back({x0, std::pow(10.0, -6.0 + 4.0 * s) * x0});
        }

    std::vector<E6Orbit> res(starts.size());
    parallel_for(starts.size(), prm.threads, [&](std::size_t i) {
        thread_local std::vector<double> ax, ly;
        res[i] = e6_orbit(starts[i], prm, *beta, ax, ly);
    });

    detail::FailureLog log;
    long long attracted = 0, escaped = 0;
    double smin = 1e300, smax = -1e300, rmin = 1e300, rmax = -1e300;
    const double target = -1.0 / prm.r;
    for (const auto& o : res) {
        escaped += o.escaped;
        if (!o.attracted)
            continue;
        ++attracted;
        smin = std::min(smin, o.slope);
        smax = std::max(smax, o.slope);
        rmin = std::min(rmin, o.ratio);
        rmax = std::max(rmax, o.ratio);
        if (!(std::abs(o.slope - target) <= 0.1))
            log.add({point_json(o.start), {{"slope", o.slope}}, {{"slope_in", {target - 0.1, target + 0.1}}}});
        if (!(o.ratio >= 0.5 && o.ratio <= 2.0))
            log.add({point_json(o.start), {{"ratio", o.ratio}}, {{"ratio_in", {0.5, 2.0}}}});
    }
    if (attracted == 0)
        log.add({nullptr, {{"attracted", 0}}, "at least one attracted orbit on the start grid"});
    rep.stats["beta"] = complex_json(*beta);
    rep.stats["starts"] = static_cast<long long>(starts.size());
    rep.stats["attracted"] = attracted;
    rep.stats["escaped"] = escaped;
    if (attracted) {
        rep.stats["slope_range"] = {smin, smax};
        rep.stats["ratio_range"] = {rmin, rmax};
        const auto first = std::find_if(res.begin(), res.end(), [](const E6Orbit& o) { return o.attracted; });
        rep.stats["example_start"] = point_json(first->start);
        rep.stats["example_abs_x_end"] = first->abs_x_end;
        rep.stats["example_log_y_over_x_end"] = first->log_ratio_end;
    }
    detail::finish(rep, log);
    return rep;
}

// --- E7: h has no directional domain of attraction --------------------------------

struct E7Params {
    double a = 0.1;
    std::uint64_t seed = 1;
    long long n_samples = 1000;
    long long horizon = 100000;
    double radius = 0.2;
    /// Samples whose (x,y)-chart diagnostics are checked.
    long long diagnostic_samples = 20;
    long long diagnostic_horizon = 10000;
    unsigned threads = 0;
};

/// Re t must fall along transitions with |y| < 1e-8, Re x > 0, |x| < 0.2.
inline long long check_t_monotone(const DiagnosticTrace& tr, Complex2 start, detail::FailureLog& log) {
    long long checked = 0;
    for (std::size_t k = 0; k + 1 < tr.rows.size(); ++k) {
        const auto& r = tr.rows[k];
        const auto& s = tr.rows[k + 1];
        if (s.n != r.n + 1)
            continue;
        if (!(std::abs(r.y) < 1e-8 && r.x.real() > 0.0 && std::abs(r.x) < 0.2))
            continue;
        ++checked;
        if (!(s.t.real() < r.t.real())) {
            log.add({point_json(start), {{"n", r.n}, {"re_t", r.t.real()}, {"re_t_next", s.t.real()}},
                     "Re t decreasing while y is negligible and Re x > 0"});
            break;
        }
    }
    return checked;
}

inline ExperimentReport e7_h_no_directional(const E7Params& prm = {}) {
    const PolyMap2 h = builtin(Family::h, prm.a);  // rejects a <= 0
    detail::require(prm.n_samples >= 0 && prm.horizon >= 64 && prm.radius > 0.0 && prm.diagnostic_samples >= 0 &&
                        prm.diagnostic_horizon >= 1,
                    "E7: invalid parameters");
    ExperimentReport rep{"E7", prm.seed};
    rep.params = {{"a", prm.a},
                  {"n_samples", prm.n_samples},
                  {"horizon", prm.horizon},
                  {"radius", prm.radius},
                  {"diagnostic_samples", prm.diagnostic_samples},
                  {"diagnostic_horizon", prm.diagnostic_horizon},
                  {"map", format_map(h, Chart::xy)}};

    // Classification runs in the (z,w) chart, where the axis {y = 0} is the line {z = w}.
    const LinearChange l = LinearChange::diagonal_to_axis();
    const LinearChange li = l.inverse();
    const PolyMap2 hz = conjugate_linear(h, li);

    std::mt19937_64 rng(prm.seed);
    std::vector<Complex2> starts_xy;
    while (static_cast<long long>(starts_xy.size()) < prm.n_samples) {
        const Complex2 s{detail::sample_disk(rng, prm.radius), detail::sample_disk(rng, prm.radius)};
        if (s.w != cplx{})
            starts_xy.push_back(s);
    }

    OrbitParams op;
    op.max_iter = prm.horizon;
    const OrbitClassifier<cplx> classifier(hz, op);
    std::vector<OrbitOutcome> res(starts_xy.size());
    parallel_for(starts_xy.size(), prm.threads,
                 [&](std::size_t i) { res[i] = classifier.classify(li.apply(starts_xy[i])); });

    detail::FailureLog log;
    std::vector<OrbitClass> cls;
    long long undirected = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        cls.push_back(res[i].cls);
        if (res[i].cls != OrbitClass::converges_to_origin)
            continue;
        if (!res[i].along) {
            ++undirected;
            continue;
        }
        const ProjDirection v = *res[i].along;
        const Complex2 w = l.apply({v.alpha, v.beta});
        const ProjDirection d = ProjDirection::from(w.z, w.w);
        const Complex2 vx{d.alpha, d.beta};
        log.add({point_json(starts_xy[i]),
                 {{"class", class_name(res[i].cls)}, {"direction_xy", point_json(vx)}, {"n", res[i].iterations_used}},
                 "no convergence to the origin along a direction"});
    }

    // The invariant axis carries x -> x (1 + a x^2), whose attracting petal
    // contains the imaginary axis.
    const Complex2 axis_xy{cplx(0.0, 0.15), 0.0};
    const OrbitOutcome axis = classifier.classify(li.apply(axis_xy));
    if (axis.cls != OrbitClass::converges_to_origin)
        log.add({point_json(axis_xy), {{"class", class_name(axis.cls)}, {"n", axis.iterations_used}},
                 "axis start converges to the origin"});

    // Diagnostics in the (x,y) chart: a start just off the repelling real
    // axis, plus the first few random samples.
    OrbitParams dp;
    dp.max_iter = prm.diagnostic_horizon;
    dp.escape_radius = 5.0;
    std::vector<Complex2> diag_starts{{0.1, 1e-12}};
    for (long long i = 0; i < std::min<long long>(prm.diagnostic_samples, prm.n_samples); ++i)
        diag_starts.push_back(starts_xy[static_cast<std::size_t>(i)]);
    long long transitions = 0;
    double defect = 0.0;
    for (const auto& s : diag_starts) {
        if (s.z == cplx{})
            continue;
        const DiagnosticTrace tr = diagnostics(h, s, dp);
        transitions += check_t_monotone(tr, s, log);
        defect = std::max(defect, tr.max_product_defect);
    }

    rep.stats["classes"] = detail::class_counts(cls);
    rep.stats["origin_without_direction"] = undirected;
    rep.stats["axis_class"] = class_name(axis.cls);
    rep.stats["axis_iterations"] = axis.iterations_used;
    if (axis.along) {
        const Complex2 w = l.apply({axis.along->alpha, axis.along->beta});
        const ProjDirection d = ProjDirection::from(w.z, w.w);
        rep.stats["axis_direction_xy"] = point_json({d.alpha, d.beta});
    }
    rep.stats["t_transitions_checked"] = transitions;
    rep.stats["max_product_defect"] = defect;
    detail::finish(rep, log);
    return rep;
}

// --- E8: class fractions on a slice (evidence only) ------------------------------

struct E8Params {
    Family family = Family::f;
    double a = 0.1;  // used by h
    double im_z = 0.01, im_w = 0.01;
    std::uint64_t seed = 1;
    long long n_samples = 1000;
    long long horizon = 10000;
    /// Real parts are drawn uniformly from (0, re_max).
    double re_max = 0.5;
    unsigned threads = 0;
};

inline ExperimentReport e8_slice_probes(const E8Params& prm = {}) {
    detail::require(prm.family == Family::f || prm.family == Family::h, "E8: family must be f or h");
    detail::require(prm.n_samples >= 0 && prm.horizon >= 64 && prm.re_max > 0.0, "E8: invalid parameters");
    const PolyMap2 map = prm.family == Family::f
                             ? builtin(Family::f)
                             : conjugate_linear(builtin(Family::h, prm.a), LinearChange::diagonal_to_axis().inverse());
    ExperimentReport rep{"E8", prm.seed};
    rep.params = {{"family", family_name(prm.family)},
                  {"slice", {prm.im_z, prm.im_w}},
                  {"n_samples", prm.n_samples},
                  {"horizon", prm.horizon},
                  {"re_max", prm.re_max}};
    if (prm.family == Family::h)
        rep.params["a"] = prm.a;

    std::mt19937_64 rng(prm.seed);
    std::uniform_real_distribution<double> u(0.0, prm.re_max);
    std::vector<Complex2> starts;
    while (static_cast<long long>(starts.size()) < prm.n_samples) {
        const double rz = u(rng), rw = u(rng);
        if (rz > 0.0 && rw > 0.0)
            starts.push_back({{rz, prm.im_z}, {rw, prm.im_w}});
    }
    OrbitParams op;
    op.max_iter = prm.horizon;
    const OrbitClassifier<cplx> classifier(map, op);
    std::vector<OrbitClass> cls(starts.size());
    parallel_for(starts.size(), prm.threads, [&](std::size_t i) { cls[i] = classifier.classify(starts[i]).cls; });

    std::array<long long, 4> c{};
    for (auto k : cls)
        ++c[static_cast<std::size_t>(k)];
    const double n = static_cast<double>(starts.size());
    rep.stats["classes"] = detail::class_counts(cls);
    rep.stats["line_fraction"] = n > 0 ? c[1] / n : 0.0;
    rep.stats["origin_fraction"] = n > 0 ? c[0] / n : 0.0;
    rep.stats["escape_fraction"] = n > 0 ? c[2] / n : 0.0;
    rep.stats["indeterminate_fraction"] = n > 0 ? c[3] / n : 0.0;
    rep.stats["violations"] = 0;
    rep.verdict = "evidence";
    return rep;
}

}  // namespace parabolic
