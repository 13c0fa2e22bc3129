// Basin pictures: f (no open basin of the origin) and gtilde with a = -0.1
// (an open basin along the diagonal). Writes two PPM files in the working
// directory and prints the class fractions.
#include <cstdio>
#include <fstream>

#include "parabolic/parabolic.hpp"

using namespace parabolic;

static void render(const char* file, const PolyMap2& m, Window w) {
    OrbitParams p;
    p.max_iter = 5000;
    const BasinGrid g = render_grid(m, w, p);
    std::ofstream(file, std::ios::binary) << grid_to_ppm(g);
    std::printf("%s\n%s\n", file, stats_csv(grid_stats(g)).c_str());
}

int main() {
    render("basin_f.ppm", builtin(Family::f), Window{0.4, 0.4, 2.4, 2.4, 300, 300});
    render("basin_gtilde.ppm", builtin(Family::gtilde, -0.1, 2), Window{0.0, 0.0, 1.0, 1.0, 200, 200});
}
