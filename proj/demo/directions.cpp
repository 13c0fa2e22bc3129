// Characteristic directions of the built-in maps, and where a few orbits go.
#include <cstdio>

#include "parabolic/parabolic.hpp"

using namespace parabolic;

static void show_directions(const char* name, const PolyMap2& m, Chart chart) {
    std::printf("%s = %s\n", name, format_map(m, chart).c_str());
    for (const auto& r : classify_directions(m)) {
        std::printf("  [%g%+gi : %g%+gi]  mult %d  lambda %g%+gi  %s", r.direction.alpha.real(),
                    r.direction.alpha.imag(), r.direction.beta.real(), r.direction.beta.imag(), r.multiplicity,
                    r.lambda.real(), r.lambda.imag(), r.degenerate ? "degenerate" : "non-degenerate");
        if (r.director)
            std::printf("  director %g%+gi", r.director->real(), r.director->imag() + 0.0);
        std::printf("\n");
    }
}

int main() {
    const PolyMap2 f = builtin(Family::f);
    show_directions("f", f, Chart::zw);
    show_directions("ftilde", builtin(Family::ftilde), Chart::xy);

    OrbitParams p;
    p.max_iter = 20000;
    std::printf("\norbits of f:\n");
    for (Complex2 s : {Complex2{0.3, 0.2}, Complex2{0.5, 0.0}, Complex2{0.25, 0.25}, Complex2{1.2, 0.1},
                       Complex2{cplx(0.1, 0.05), cplx(0.08, -0.02)}}) {
        const OrbitOutcome o = classify(f, s, p);
        std::printf("  (%g%+gi, %g%+gi) -> %-24s after %lld steps\n", s.z.real(), s.z.imag(), s.w.real(),
                    s.w.imag(), class_name(o.cls), o.iterations_used);
    }
}
