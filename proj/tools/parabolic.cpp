// parabolic: command-line front end.
//
//   parabolic chardirs --family f
//   parabolic orbit    --family f --start 0.3,0.2 --trace orbit.csv
//   parabolic render   --family f --window 0.4,0.4,2.4,2.4 --px 600,600 --out f.ppm
//   parabolic verify   --experiment E3 --seed 7
//   parabolic fmt      --map "(z*(1-(z-w)), w*(1+(z-w)))"
//
// Exit codes: 0 success / pass / evidence, 1 experiment failed, 2 usage,
// parse or parameter error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parabolic/parabolic.hpp"

using namespace parabolic;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct MapOptions {
    std::string expr;
    std::string family;
    std::string a;
    int r = 0;
};

struct Options {
    MapOptions map;
    std::string start;
    std::string window = "0.4,0.4,2.4,2.4";
    std::string px = "600,600";
    std::string slice = "0,0";
    bool overlay = false;
    unsigned threads = 0;
    std::uint64_t seed = 1;
    std::string experiment;
    std::string out = "-";
    std::string trace;
    std::string diagnostics;
    std::string stats;
    bool degreewise = false;
    long long max_iter = -1;
    long long stride = 1;
    long long samples = -1;
    long long horizon = -1;
    std::string chart;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    if (!s.empty() && s.back() == sep)
        parts.emplace_back();
    return parts;
}

double parse_real(const std::string& s, const char* what) {
    const cplx c = parse_complex(s);
    if (c.imag() != 0.0)
        throw invalid_argument(std::string(what) + " must be real, got '" + s + "'");
    return c.real();
}

std::vector<double> parse_reals(const std::string& s, std::size_t n, const char* what) {
    const auto parts = split(s, ',');
    if (parts.size() != n)
        throw invalid_argument(std::string(what) + " expects " + std::to_string(n) + " comma-separated numbers");
    std::vector<double> v;
    for (const auto& p : parts)
        v.push_back(parse_real(p, what));
    return v;
}

// "re,im" or a literal such as "1+2i".
cplx parse_complex_flag(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() == 2)
        return {parse_real(parts[0], "--a"), parse_real(parts[1], "--a")};
    if (parts.size() == 1)
        return parse_complex(s);
    throw invalid_argument("complex value must be 're,im' or a literal like 1+2i");
}

// "z,w" with literal coordinates, or "re_z,im_z,re_w,im_w".
Complex2 parse_point(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() == 2)
        return {parse_complex(parts[0]), parse_complex(parts[1])};
    if (parts.size() == 4)
        return {{parse_real(parts[0], "--start"), parse_real(parts[1], "--start")},
                {parse_real(parts[2], "--start"), parse_real(parts[3], "--start")}};
    throw invalid_argument("--start expects 'z,w' or 're_z,im_z,re_w,im_w'");
}

ParsedMap load_map(const MapOptions& m) {
    if (!m.expr.empty() && !m.family.empty())
        throw invalid_argument("give either --map or --family, not both");
    if (!m.expr.empty())
        return MapSource{m.expr}.instantiate();
    if (m.family.empty())
        throw invalid_argument("a map is required: --map EXPR or --family NAME");
    const auto fam = family_from_name(m.family);
    if (!fam)
        throw invalid_argument("unknown family '" + m.family + "' (f, ftilde, g, h, gtilde)");
    FamilySpec spec{*fam, m.a.empty() ? cplx{} : parse_complex_flag(m.a), m.r};
    return MapSource{spec}.instantiate();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw invalid_argument("cannot open '" + path + "' for writing");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!os)
        throw invalid_argument("failed writing '" + path + "'");
}

OrbitParams orbit_params(const Options& o) {
    OrbitParams p;
    if (o.max_iter >= 0)
        p.max_iter = o.max_iter;
    p.validate();
    return p;
}

// Classification and rendering work in the (z,w) chart, diagnostics in (x,y).
const LinearChange& to_xy() {
    static const LinearChange l = LinearChange::diagonal_to_axis();
    return l;
}

int cmd_chardirs(const Options& o) {
    const ParsedMap pm = load_map(o.map);
    const auto reports = classify_directions(pm.map);
    ordered_json j = chardirs_json(reports);
    if (o.degreewise)
        for (std::size_t i = 0; i < reports.size(); ++i)
            j[i]["degreewise"] = degreewise_json(degreewise(pm.map, reports[i].direction));
    write_output(o.out, dump_json(j));
    return exit_ok;
}

int cmd_orbit(const Options& o) {
    const ParsedMap pm = load_map(o.map);
    if (o.start.empty())
        throw invalid_argument("orbit needs --start");
    const Complex2 start = parse_point(o.start);
    const OrbitParams params = orbit_params(o);

    const bool xy = pm.chart == Chart::xy;
    const PolyMap2 zw_map = xy ? conjugate_linear(pm.map, to_xy().inverse()) : pm.map;
    const Complex2 zw_start = xy ? to_xy().inverse().apply(start) : start;
    const OrbitOutcome out = classify(zw_map, zw_start, params);

    ordered_json j;
    j["map"] = format_map(pm.map, pm.chart);
    j["chart"] = xy ? "xy" : "zw";
    j["start"] = {start.z.real(), start.z.imag(), start.w.real(), start.w.imag()};
    if (xy) {
        j["classified_in"] = "zw";
        j["start_zw"] = {zw_start.z.real(), zw_start.z.imag(), zw_start.w.real(), zw_start.w.imag()};
    }
    j["outcome"] = outcome_json(out);

    if (!o.trace.empty())
        write_output(o.trace, orbit_trace_csv(zw_map, zw_start, out.iterations_used, o.stride));
    std::string diag;
    if (!o.diagnostics.empty()) {
        const PolyMap2 xy_map = xy ? pm.map : conjugate_linear(pm.map, to_xy());
        const Complex2 xy_start = xy ? start : to_xy().apply(start);
        const DiagnosticTrace tr = diagnostics(xy_map, xy_start, params, o.stride);
        j["diagnostics"] = {{"steps", tr.steps},
                            {"truncated_at_zero", tr.truncated_at_zero},
                            {"escaped", tr.escaped},
                            {"max_product_defect", tr.max_product_defect}};
        diag = diagnostics_csv(tr);
    }
    write_output(o.out, dump_json(j));
    if (!diag.empty())
        write_output(o.diagnostics, diag);
    return exit_ok;
}

int cmd_render(const Options& o) {
    const ParsedMap pm = load_map(o.map);
    const auto w = parse_reals(o.window, 4, "--window");
    const auto px = parse_reals(o.px, 2, "--px");
    const auto sl = parse_reals(o.slice, 2, "--slice");
    if (px[0] != std::floor(px[0]) || px[1] != std::floor(px[1]))
        throw invalid_argument("--px expects whole numbers");
    Window win{w[0], w[1], w[2], w[3], static_cast<int>(px[0]), static_cast<int>(px[1]), sl[0], sl[1]};
    win.validate();
    const PolyMap2 zw_map = pm.chart == Chart::xy ? conjugate_linear(pm.map, to_xy().inverse()) : pm.map;
    RenderOptions ro;
    ro.threads = o.threads;
    ro.overlay_preimages = o.overlay;
    const BasinGrid grid = render_grid(zw_map, win, orbit_params(o), ro);
    write_output(o.out == "-" ? "basin.ppm" : o.out, grid_to_ppm(grid));
    if (!o.stats.empty())
        write_output(o.stats, stats_csv(grid_stats(grid)));
    return exit_ok;
}

int cmd_verify(const Options& o) {
    const std::string& id = o.experiment;
    const bool has_map = !o.map.expr.empty() || (!o.map.family.empty() && id != "E8");
    auto map_or_f = [&] { return has_map ? load_map(o.map).map : builtin(Family::f); };
    auto set = [](long long v, auto& field) {
        if (v >= 0)
            field = v;
    };
    ExperimentReport rep;
    if (id == "E1") {
        E1Params p;
        p.seed = o.seed;
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e1_region_a(p, map_or_f());
    } else if (id == "E2") {
        E2Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e2_growth(p, map_or_f());
    } else if (id == "E3") {
        E3Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e3_rate(p, map_or_f());
    } else if (id == "E4") {
        E4Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e4_no_origin_in_a(p, map_or_f());
    } else if (id == "E5") {
        E5Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e5_no_domain_f(p);
    } else if (id == "E6") {
        E6Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        if (!o.map.a.empty())
            p.a = parse_complex_flag(o.map.a);
        if (o.map.r != 0)
            p.r = o.map.r;
        set(o.horizon, p.horizon);
        rep = e6_g_attraction(p);
    } else if (id == "E7") {
        E7Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        if (!o.map.a.empty()) {
            const cplx a = parse_complex_flag(o.map.a);
            if (a.imag() != 0.0)
                throw family_error("h requires a real a > 0");
            p.a = a.real();
        }
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e7_h_no_directional(p);
    } else if (id == "E8") {
        E8Params p;
        p.seed = o.seed;
        p.threads = o.threads;
        if (!o.map.family.empty()) {
            const auto fam = family_from_name(o.map.family);
            if (!fam || (*fam != Family::f && *fam != Family::h))
                throw invalid_argument("E8 runs on --family f or h");
            p.family = *fam;
        }
        if (!o.map.a.empty())
            p.a = parse_real(o.map.a, "--a");
        const auto sl = parse_reals(o.slice == "0,0" ? "0.01,0.01" : o.slice, 2, "--slice");
        p.im_z = sl[0];
        p.im_w = sl[1];
        set(o.samples, p.n_samples);
        set(o.horizon, p.horizon);
        rep = e8_slice_probes(p);
    } else {
        throw invalid_argument("unknown experiment '" + id + "' (E1..E8)");
    }
    write_output(o.out, dump_json(to_json(rep)));
    return rep.passed() ? exit_ok : exit_fail;
}

int cmd_fmt(const Options& o) {
    const ParsedMap pm = load_map(o.map);
    Chart chart = pm.chart;
    if (o.chart == "zw")
        chart = Chart::zw;
    else if (o.chart == "xy")
        chart = Chart::xy;
    else if (!o.chart.empty())
        throw invalid_argument("--chart must be zw or xy");
    write_output(o.out, format_map(pm.map, chart) + "\n");
    return exit_ok;
}

void add_map_options(CLI::App* sub, Options& o) {
    auto* m = sub->add_option("--map", o.map.expr, "map as \"(P(z,w), Q(z,w))\" or in x,y");
    auto* f = sub->add_option("--family", o.map.family, "builtin family: f, ftilde, g, h, gtilde");
    m->excludes(f);
    sub->add_option("--a", o.map.a, "family parameter a ('re,im' or literal)");
    sub->add_option("--r", o.map.r, "family parameter r");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analysis of holomorphic maps of C^2 tangent to the identity"};
    app.require_subcommand(1);
    Options o;

    auto* chardirs = app.add_subcommand("chardirs", "characteristic directions, eigenvalues and directors (JSON)");
    add_map_options(chardirs, o);
    chardirs->add_flag("--degreewise", o.degreewise, "add the degree-by-degree status of each direction");
    chardirs->add_option("--out", o.out, "output file ('-' for stdout)");

    auto* orbit = app.add_subcommand("orbit", "classify one orbit (JSON), optionally with traces");
    add_map_options(orbit, o);
    orbit->add_option("--start", o.start, "start point 'z,w' or 're_z,im_z,re_w,im_w'");
    orbit->add_option("--max-iter", o.max_iter, "iteration budget");
    orbit->add_option("--trace", o.trace, "write the (z,w) orbit as CSV");
    orbit->add_option("--diagnostics", o.diagnostics, "write (x,y)-chart diagnostics CSV")
        ->expected(0, 1)
        ->default_str("-");
    orbit->add_option("--stride", o.stride, "record every n-th step in traces");
    orbit->add_option("--out", o.out, "outcome JSON file ('-' for stdout)");

    auto* render = app.add_subcommand("render", "basin picture as binary PPM");
    add_map_options(render, o);
    render->add_option("--window", o.window, "cx,cy,ex,ey (center and full extents)");
    render->add_option("--px", o.px, "W,H in pixels");
    render->add_option("--slice", o.slice, "imz,imw: fixed imaginary parts");
    render->add_flag("--overlay-preimages", o.overlay, "mark starts near preimages of the axes");
    render->add_option("--max-iter", o.max_iter, "iteration budget per pixel");
    render->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    render->add_option("--out", o.out, "PPM file (default basin.ppm)");
    render->add_option("--stats", o.stats, "write class counts as CSV");

    auto* verify = app.add_subcommand("verify", "run one experiment and print its JSON report");
    add_map_options(verify, o);
    verify->add_option("--experiment", o.experiment, "E1..E8")->required();
    verify->add_option("--seed", o.seed, "random seed");
    verify->add_option("--samples", o.samples, "number of samples");
    verify->add_option("--horizon", o.horizon, "iterations per sample");
    verify->add_option("--slice", o.slice, "E8: imz,imw");
    verify->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    verify->add_option("--out", o.out, "report file ('-' for stdout)");

    auto* fmt = app.add_subcommand("fmt", "parse a map and print it in canonical form");
    add_map_options(fmt, o);
    fmt->add_option("--chart", o.chart, "print in zw or xy variables (default: as given)");
    fmt->add_option("--out", o.out, "output file ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*chardirs)
            return cmd_chardirs(o);
        if (*orbit)
            return cmd_orbit(o);
        if (*render)
            return cmd_render(o);
        if (*verify)
            return cmd_verify(o);
        if (*fmt)
            return cmd_fmt(o);
    } catch (const parabolic::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
