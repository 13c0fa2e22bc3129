#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "orbit.hpp"

namespace parabolic {

/// Rectangle of starts in the real (z,w)-plane, optionally shifted into C^2
/// by fixed imaginary parts. Extents are full side lengths.
struct Window {
    double cx = 0.4, cy = 0.4;
    double ex = 2.4, ey = 2.4;
    int width = 600, height = 600;
    double im_z = 0.0, im_w = 0.0;

    void validate() const {
        if (!(ex > 0.0) || !(ey > 0.0) || !std::isfinite(ex) || !std::isfinite(ey))
            throw invalid_argument("window extents must be positive");
        if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(im_z) || !std::isfinite(im_w))
            throw invalid_argument("window center and slice must be finite");
        if (width < 1 || height < 1)
            throw invalid_argument("window needs at least one pixel in each direction");
    }

    /// Center of pixel (i, j); column i runs along z, row 0 is the largest w.
    Complex2 pixel_point(int i, int j) const {
        const double re_z = cx - 0.5 * ex + (i + 0.5) * ex / width;
        const double re_w = cy + 0.5 * ey - (j + 0.5) * ey / height;
        return {{re_z, im_z}, {re_w, im_w}};
    }
};

struct PixelRecord {
    OrbitClass cls = OrbitClass::indeterminate;
    long long iterations_used = 0;
    /// Start lies within 1e-3 of a first or second preimage of the axes.
    bool near_preimage = false;

    friend bool operator==(const PixelRecord&, const PixelRecord&) = default;
};

struct BasinGrid {
    Window window;
    long long max_iter = 0;
    std::vector<PixelRecord> pixels;  // row-major

    const PixelRecord& at(int i, int j) const {
        return pixels[static_cast<std::size_t>(j) * static_cast<std::size_t>(window.width) +
                      static_cast<std::size_t>(i)];
    }
};

struct RenderOptions {
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
    bool overlay_preimages = false;
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Classify every pixel center. Rows are claimed dynamically by the workers
/// and written to disjoint slices, so the result does not depend on the
/// thread count or scheduling.
inline BasinGrid render_grid(const PolyMap2& map, const Window& window, const OrbitParams& params,
                             RenderOptions opts = {}) {
    window.validate();
    const OrbitClassifier<cplx> classifier(map, params);
    BasinGrid grid{window, params.max_iter, {}};
    grid.pixels.resize(static_cast<std::size_t>(window.width) * static_cast<std::size_t>(window.height));

    std::atomic<int> next_row{0};
    auto worker = [&] {
        for (int j = next_row++; j < window.height; j = next_row++) {
            PixelRecord* row = grid.pixels.data() + static_cast<std::size_t>(j) * window.width;
            for (int i = 0; i < window.width; ++i) {
                const Complex2 p = window.pixel_point(i, j);
                const OrbitOutcome o = classifier.classify(p);
                row[i].cls = o.cls;
                row[i].iterations_used = o.iterations_used;
                if (opts.overlay_preimages) {
                    const auto res = preimage_residuals(p);
                    row[i].near_preimage = *std::min_element(res.begin(), res.end()) < 1e-3;
                }
            }
        }
    };
    const unsigned n = std::min<unsigned>(resolve_threads(opts.threads), static_cast<unsigned>(window.height));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t)
            pool.emplace_back(worker);
        worker();
    }
    return grid;
}

using Rgb = std::array<std::uint8_t, 3>;

struct Palette {
    Rgb origin{255, 215, 0};
    Rgb line{0, 0, 255};
    Rgb escape{220, 40, 40};
    Rgb indeterminate{245, 200, 200};
    Rgb overlay{40, 40, 40};

    const Rgb& base(OrbitClass c) const {
        switch (c) {
        case OrbitClass::converges_to_origin: return origin;
        case OrbitClass::converges_to_line: return line;
        case OrbitClass::escapes: return escape;
        case OrbitClass::indeterminate: return indeterminate;
        }
        return indeterminate;
    }
};

/// Base color darkened by s = 0.3 + 0.7 (1 - min(1, iterations/max_iter)),
/// each channel floored.
inline Rgb shade(const Rgb& base, long long iterations, long long max_iter) {
    const double frac = max_iter > 0 ? std::min(1.0, static_cast<double>(iterations) / max_iter) : 1.0;
    const double s = 0.3 + 0.7 * (1.0 - frac);
    Rgb out;
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<std::uint8_t>(std::floor(base[c] * s));
    return out;
}

/// Binary PPM (P6).
inline std::string grid_to_ppm(const BasinGrid& grid, const Palette& palette = {}) {
    std::string out = "P6\n" + std::to_string(grid.window.width) + " " + std::to_string(grid.window.height) + "\n255\n";
    out.reserve(out.size() + grid.pixels.size() * 3);
    for (const auto& px : grid.pixels) {
        const Rgb c = px.near_preimage ? palette.overlay : shade(palette.base(px.cls), px.iterations_used, grid.max_iter);
        out.append(reinterpret_cast<const char*>(c.data()), 3);
    }
    return out;
}

struct GridStats {
    std::array<long long, 4> counts{};
    std::array<double, 4> fractions{};
    long long total = 0;
};

inline constexpr std::array<OrbitClass, 4> all_classes{OrbitClass::converges_to_origin, OrbitClass::converges_to_line,
                                                       OrbitClass::escapes, OrbitClass::indeterminate};

inline GridStats grid_stats(const BasinGrid& grid) {
    GridStats st;
    for (const auto& px : grid.pixels)
        ++st.counts[static_cast<std::size_t>(px.cls)];
    st.total = static_cast<long long>(grid.pixels.size());
    for (std::size_t k = 0; k < 4; ++k)
        st.fractions[k] = st.total ? static_cast<double>(st.counts[k]) / st.total : 0.0;
    return st;
}

/// `class,count,fraction` rows, one per class.
inline std::string stats_csv(const GridStats& st) {
    std::string out = "class,count,fraction\n";
    for (std::size_t k = 0; k < 4; ++k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", st.fractions[k]);
        out += std::string(class_name(all_classes[k])) + "," + std::to_string(st.counts[k]) + "," + buf + "\n";
    }
    return out;
}

}  // namespace parabolic
