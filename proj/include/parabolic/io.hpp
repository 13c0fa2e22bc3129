#pragma once

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "chardir.hpp"
#include "orbit.hpp"
#include "poly.hpp"

namespace parabolic {

using ordered_json = nlohmann::ordered_json;

/// 17 significant digits; JSON has no literal for non-finite values, so
/// those become null.
inline std::string format_number(double v) {
    if (!std::isfinite(v))
        return "null";
    if (v == 0.0)
        return "0";  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV cells spell non-finite values out (inf, -inf, nan).
inline std::string csv_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return format_number(v);
}

namespace detail {

inline void write_json(std::string& out, const ordered_json& j, int indent, int depth) {
    auto newline = [&](int d) {
        if (indent >= 0) {
            out += '\n';
            out.append(static_cast<std::size_t>(indent * d), ' ');
        }
    };
    const char* sep = indent >= 0 ? ": " : ":";
    switch (j.type()) {
    case ordered_json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out += ',';
            first = false;
            newline(depth + 1);
            out += ordered_json(it.key()).dump();
            out += sep;
            write_json(out, it.value(), indent, depth + 1);
        }
        newline(depth);
        out += '}';
        return;
    }
    case ordered_json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        const bool flat = std::all_of(j.begin(), j.end(), [](const ordered_json& e) { return e.is_primitive(); });
        out += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first)
                out += flat && indent >= 0 ? ", " : ",";
            first = false;
            if (!flat)
                newline(depth + 1);
            write_json(out, e, indent, depth + 1);
        }
        if (!flat)
            newline(depth);
        out += ']';
        return;
    }
    case ordered_json::value_t::number_float:
        out += format_number(j.get<double>());
        return;
    default:
        out += j.dump();
    }
}

}  // namespace detail

/// JSON text with every floating-point number at 17 significant digits.
/// indent < 0 gives a single line.
inline std::string dump_json(const ordered_json& j, int indent = 2) {
    std::string out;
    detail::write_json(out, j, indent, 0);
    if (indent >= 0)
        out += '\n';
    return out;
}

inline ordered_json json_complex(cplx c) { return {c.real(), c.imag()}; }
inline ordered_json json_direction(const ProjDirection& v) {
    return {v.alpha.real(), v.alpha.imag(), v.beta.real(), v.beta.imag()};
}

/// One object per characteristic direction, fields in fixed order.
inline ordered_json chardirs_json(const std::vector<CharDirReport>& reports) {
    ordered_json out = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json o;
        o["direction"] = json_direction(r.direction);
        o["multiplicity"] = r.multiplicity;
        o["lambda"] = json_complex(r.lambda);
        o["degenerate"] = r.degenerate;
        o["director"] = r.director ? json_complex(*r.director) : ordered_json(nullptr);
        out.push_back(std::move(o));
    }
    return out;
}

inline ordered_json degreewise_json(const DegreewiseStatus& st) {
    ordered_json o;
    o["per_degree"] = ordered_json::array();
    for (const auto& d : st.per_degree)
        o["per_degree"].push_back({{"degree", d.degree},
                                   {"characteristic", d.is_char_dir},
                                   {"degenerate", d.degenerate},
                                   {"lambda", json_complex(d.lambda)}});
    o["s"] = st.s_truncated;
    o["through_top"] = st.through_top;
    o["first_nondegenerate_degree"] = st.r_plus_1 ? ordered_json(*st.r_plus_1) : ordered_json(nullptr);
    o["lambda_there"] = st.r_plus_1 ? json_complex(st.lambda_at_r_plus_1) : ordered_json(nullptr);
    return o;
}

inline ordered_json outcome_json(const OrbitOutcome& o) {
    ordered_json j;
    j["class"] = class_name(o.cls);
    j["along"] = o.along ? json_direction(*o.along) : ordered_json(nullptr);
    j["by_rate"] = o.by_rate;
    j["iterations_used"] = o.iterations_used;
    j["final_point"] = {o.final_point.z.real(), o.final_point.z.imag(), o.final_point.w.real(),
                        o.final_point.w.imag()};
    j["sup_n_times_gap"] = o.sup_n_times_gap;
    j["monotone_coordinate_ok"] = o.monotone_coordinate_ok;
    return j;
}

/// `n,re_z,im_z,re_w,im_w,gap,ngap`, one row every `stride` steps for
/// n = 0..steps (the last step always included).
inline std::string orbit_trace_csv(const PolyMap2& map, Complex2 start, long long steps, long long stride = 1) {
    if (steps < 0 || stride < 1)
        throw invalid_argument("orbit trace: steps >= 0 and stride >= 1 required");
    const CompiledMap<cplx> f(map);
    auto ws = f.make_workspace();
    std::string out = "n,re_z,im_z,re_w,im_w,gap,ngap\n";
    Complex2 p = start;
    for (long long n = 0; n <= steps; ++n) {
        if (n % stride == 0 || n == steps) {
            const double gap = std::abs(p.z - p.w);
            out += std::to_string(n);
            for (double v : {p.z.real(), p.z.imag(), p.w.real(), p.w.imag(), gap, static_cast<double>(n) * gap})
                out += ',' + csv_number(v);
            out += '\n';
        }
        if (n < steps)
            p = f(p, ws);
    }
    return out;
}

inline std::string diagnostics_csv(const DiagnosticTrace& tr) {
    std::string out =
        "n,re_x,im_x,re_y,im_y,re_u,im_u,re_v,im_v,re_t,im_t,re_inv_y,im_inv_y,sum_re_x,product_defect\n";
    for (const auto& r : tr.rows) {
        out += std::to_string(r.n);
        for (cplx c : {r.x, r.y, r.u, r.v, r.t, r.inv_y})
            out += ',' + csv_number(c.real()) + ',' + csv_number(c.imag());
        out += ',' + csv_number(r.sum_re_x) + ',' + csv_number(r.product_defect) + '\n';
    }
    return out;
}

}  // namespace parabolic
