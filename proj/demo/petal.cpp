// h(x,y) = (x - y^2 + 0.1 x^3, y - x y): on the axis the imaginary direction
// is an attracting petal; a start just off the axis drifts away from it.
// Prints |y/x| along both orbits.
#include <cmath>
#include <cstdio>

#include "parabolic/parabolic.hpp"

using namespace parabolic;

int main() {
    const PolyMap2 h = builtin(Family::h, 0.1);
    OrbitParams p;
    p.max_iter = 200000;
    for (Complex2 s : {Complex2{cplx(0.0, 0.15), 0.0}, Complex2{cplx(0.0, 0.15), cplx(0.0, 1e-6)}}) {
        const DiagnosticTrace tr = diagnostics(h, s, p, 20000);
        std::printf("start (%g%+gi, %g%+gi)\n      n          |x|        |y/x|\n", s.z.real(), s.z.imag(),
                    s.w.real(), s.w.imag());
        for (const auto& r : tr.rows)
            std::printf("%7lld  %11.4e  %11.4e\n", r.n, std::abs(r.x), std::abs(r.u));
        if (tr.escaped)
            std::printf("escaped after %lld steps\n", tr.steps);
        std::printf("\n");
    }
}
