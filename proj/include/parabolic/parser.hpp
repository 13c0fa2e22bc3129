#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "errors.hpp"
#include "poly.hpp"

namespace parabolic {

/// Which variable names a map is written in. The first variable of either
/// pair is coordinate 0, the second coordinate 1.
enum class Chart { zw, xy };

inline const char* var_name(Chart chart, int index) {
    if (chart == Chart::zw)
        return index == 0 ? "z" : "w";
    return index == 0 ? "x" : "y";
}

struct ParsedMap {
    PolyMap2 map;
    Chart chart;
};

namespace detail {

constexpr int max_parse_degree = 64;

/// Sparse bivariate polynomial used only while parsing: (e0, e1) -> coefficient.
using SparsePoly = std::map<std::pair<int, int>, cplx>;

inline int total_degree(const SparsePoly& p) {
    int d = 0;
    for (const auto& [e, c] : p)
        d = std::max(d, e.first + e.second);
    return d;
}

inline void prune(SparsePoly& p) {
    std::erase_if(p, [](const auto& kv) { return kv.second == cplx{}; });
}

inline SparsePoly add(SparsePoly a, const SparsePoly& b, double sign) {
    for (const auto& [e, c] : b)
        a[e] += sign * c;
    prune(a);
    return a;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    ParsedMap parse_map() {
        expect('(');
        SparsePoly first = expr();
        expect(',');
        SparsePoly second = expr();
        expect(')');
        skip_ws();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        const Chart chart = chart_.value_or(Chart::xy);
        return {assemble(first, second, chart), chart};
    }

    cplx parse_constant() {
        const SparsePoly p = expr();
        skip_ws();
        if (pos_ != s_.size())
            fail("unexpected trailing input");
        if (chart_ || (!p.empty() && !p.count({0, 0})))
            fail("expected a constant");
        return p.empty() ? cplx{} : p.at({0, 0});
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::optional<Chart> chart_;

    [[noreturn]] void fail(const std::string& what) const { throw parse_error(pos_, what); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    void expect(char c) {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    SparsePoly mul(const SparsePoly& a, const SparsePoly& b) const {
        if (total_degree(a) + total_degree(b) > max_parse_degree)
            fail("total degree exceeds " + std::to_string(max_parse_degree));
        SparsePoly out;
        for (const auto& [ea, ca] : a)
            for (const auto& [eb, cb] : b)
                out[{ea.first + eb.first, ea.second + eb.second}] += ca * cb;
        prune(out);
        return out;
    }

    // expr := term (('+' | '-') term)*
    SparsePoly expr() {
        SparsePoly acc = term();
        for (;;) {
            const char c = peek();
            if (c != '+' && c != '-')
                return acc;
            ++pos_;
            acc = add(std::move(acc), term(), c == '+' ? 1.0 : -1.0);
        }
    }

    // term := unary ('*' unary)*
    SparsePoly term() {
        SparsePoly acc = unary();
        while (peek() == '*') {
            ++pos_;
            acc = mul(acc, unary());
        }
        return acc;
    }

    // unary := ('+' | '-') unary | power
    SparsePoly unary() {
        const char c = peek();
        if (c == '-' || c == '+') {
            ++pos_;
            SparsePoly p = unary();
            if (c == '-')
                for (auto& [e, v] : p)
                    v = -v;
            return p;
        }
        return power();
    }

    // power := primary ('^' positive-integer)?
    SparsePoly power() {
        SparsePoly base = primary();
        if (peek() != '^')
            return base;
        ++pos_;
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("exponent must be a positive integer literal");
        const std::string_view digits = s_.substr(start, pos_ - start);
        if (digits.size() > 4)
            fail("total degree exceeds " + std::to_string(max_parse_degree));
        const int e = std::stoi(std::string(digits));
        if (e < 1)
            fail("exponent must be a positive integer literal");
        if (static_cast<long>(e) * total_degree(base) > max_parse_degree)
            fail("total degree exceeds " + std::to_string(max_parse_degree));
        SparsePoly out{{{0, 0}, 1.0}};
        for (int k = 0; k < e; ++k)
            out = mul(out, base);
        return out;
    }

    // primary := number ['i'] | number '/' number | 'i' | variable | '(' expr ')'
    SparsePoly primary() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            SparsePoly inner = expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = number();
            if (pos_ < s_.size() && s_[pos_] == '/') {
                ++pos_;
                if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
                    fail("rational literal needs a denominator");
                const double den = number();
                if (den == 0.0)
                    fail("rational literal with zero denominator");
                v /= den;
            }
            if (pos_ < s_.size() && s_[pos_] == 'i' && !ident_continues(pos_ + 1)) {
                ++pos_;
                return constant({0.0, v});
            }
            return constant({v, 0.0});
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            const std::string_view name = s_.substr(start, pos_ - start);
            if (name == "i")
                return constant({0.0, 1.0});
            if (name.size() == 1) {
                const char v = name[0];
                const std::optional<Chart> chart = (v == 'z' || v == 'w')   ? std::optional(Chart::zw)
                                                   : (v == 'x' || v == 'y') ? std::optional(Chart::xy)
                                                                            : std::nullopt;
                if (chart) {
                    if (chart_ && *chart_ != *chart) {
                        pos_ = start;
                        fail("variables {z,w} and {x,y} cannot be mixed");
                    }
                    chart_ = chart;
                    const bool first = (v == 'z' || v == 'x');
                    return SparsePoly{{{first ? 1 : 0, first ? 0 : 1}, 1.0}};
                }
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(name) + "'");
        }
        if (c == '\0')
            fail("unexpected end of input");
        fail(std::string("unexpected character '") + c + "'");
    }

    bool ident_continues(std::size_t at) const {
        return at < s_.size() && std::isalnum(static_cast<unsigned char>(s_[at]));
    }

    static SparsePoly constant(cplx v) {
        SparsePoly p;
        if (v != cplx{})
            p[{0, 0}] = v;
        return p;
    }

    double number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
        };
        digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-'))
                ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                digits();
            else
                pos_ = save;
        }
        const std::string lit(s_.substr(start, pos_ - start));
        if (lit == ".")
            fail("malformed number");
        char* end = nullptr;
        const double v = std::strtod(lit.c_str(), &end);
        if (end != lit.c_str() + lit.size() || !std::isfinite(v)) {
            pos_ = start;
            fail("malformed number '" + lit + "'");
        }
        return v;
    }

    PolyMap2 assemble(const SparsePoly& first, const SparsePoly& second, Chart chart) const {
        const std::string v0 = var_name(chart, 0), v1 = var_name(chart, 1);
        auto coef = [](const SparsePoly& p, int a, int b) {
            auto it = p.find({a, b});
            return it == p.end() ? cplx{} : it->second;
        };
        auto show = [](cplx c) {
            return "(" + std::to_string(c.real()) + (c.imag() < 0 ? "" : "+") + std::to_string(c.imag()) + "i)";
        };
        for (int k = 0; k < 2; ++k) {
            const SparsePoly& p = k == 0 ? first : second;
            const std::string which = k == 0 ? "first" : "second";
            if (coef(p, 0, 0) != cplx{})
                throw parse_error(pos_, "the map must fix the origin: " + which + " component has constant term " +
                                            show(coef(p, 0, 0)));
            const cplx c0 = coef(p, 1, 0), c1 = coef(p, 0, 1);
            const cplx want0 = k == 0 ? 1.0 : 0.0, want1 = k == 0 ? 0.0 : 1.0;
            if (c0 != want0 || c1 != want1)
                throw parse_error(pos_, "linear part must be the identity: " + which + " component has " + v0 +
                                            "-coefficient " + show(c0) + " and " + v1 + "-coefficient " + show(c1) +
                                            ", expected " + (k == 0 ? v0 : v1) + " alone");
        }
        std::map<int, Component> comps;
        auto place = [&](const SparsePoly& p, bool is_p) {
            for (const auto& [e, c] : p) {
                const int d = e.first + e.second;
                if (d < 2)
                    continue;
                auto [it, fresh] = comps.try_emplace(d, Component{HomPoly2::zero(d), HomPoly2::zero(d)});
                HomPoly2& target = is_p ? it->second.p : it->second.q;
                std::vector<cplx> cs(target.coeffs().begin(), target.coeffs().end());
                cs[static_cast<std::size_t>(e.second)] += c;
                target = HomPoly2(d, std::move(cs));
            }
        };
        place(first, true);
        place(second, false);
        try {
            return PolyMap2(std::move(comps));
        } catch (const invalid_map& e) {
            throw parse_error(pos_, e.what());
        }
    }
};

inline std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string monomial(Chart chart, int e0, int e1) {
    std::string out;
    auto put = [&](int e, int idx) {
        if (e == 0)
            return;
        if (!out.empty())
            out += "*";
        out += var_name(chart, idx);
        if (e > 1)
            out += "^" + std::to_string(e);
    };
    put(e0, 0);
    put(e1, 1);
    return out;
}

}  // namespace detail

/// Parse "(expr, expr)" over {z,w} or {x,y}; see docs/grammar.md.
inline ParsedMap parse_map_with_chart(std::string_view text) { return detail::Parser(text).parse_map(); }

inline PolyMap2 parse_map(std::string_view text) { return parse_map_with_chart(text).map; }

/// Canonical text: per component the linear variable, then monomials by
/// ascending degree with the first variable's power descending. Coefficients
/// print in shortest round-trip form, so parse_map recovers them exactly.
inline std::string format_map(const PolyMap2& map, Chart chart = Chart::xy) {
    std::string out = "(";
    for (int k = 0; k < 2; ++k) {
        if (k == 1)
            out += ", ";
        out += var_name(chart, k);
        for (const auto& [j, comp] : map.components()) {
            const HomPoly2& poly = k == 0 ? comp.p : comp.q;
            for (int i = 0; i <= j; ++i) {
                const cplx c = poly.coeff(i);
                if (c == cplx{})
                    continue;
                const std::string mono = detail::monomial(chart, j - i, i);
                if (c.imag() == 0.0) {
                    const double re = c.real();
                    out += re < 0 ? " - " : " + ";
                    if (std::abs(re) != 1.0)
                        out += detail::format_real(std::abs(re)) + "*";
                } else {
                    out += " + (" + detail::format_real(c.real()) + (c.imag() < 0 ? "-" : "+") +
                           detail::format_real(std::abs(c.imag())) + "i)*";
                }
                out += mono;
            }
        }
    }
    return out + ")";
}

// --- named families -------------------------------------------------------

enum class Family { f, ftilde, g, h, gtilde };

inline std::optional<Family> family_from_name(std::string_view name) {
    if (name == "f")
        return Family::f;
    if (name == "ftilde")
        return Family::ftilde;
    if (name == "g")
        return Family::g;
    if (name == "h")
        return Family::h;
    if (name == "gtilde")
        return Family::gtilde;
    return std::nullopt;
}

inline const char* family_name(Family f) {
    switch (f) {
    case Family::f: return "f";
    case Family::ftilde: return "ftilde";
    case Family::g: return "g";
    case Family::h: return "h";
    case Family::gtilde: return "gtilde";
    }
    return "?";
}

/// Chart each family is written in.
inline Chart family_chart(Family f) { return (f == Family::f || f == Family::gtilde) ? Chart::zw : Chart::xy; }

struct FamilySpec {
    Family family = Family::f;
    cplx a{};
    int r = 0;
};

namespace detail {

inline std::string describe(cplx a, int r) {
    std::string s = "a=" + format_real(a.real());
    if (a.imag() != 0.0)
        s += (a.imag() < 0 ? "-" : "+") + format_real(std::abs(a.imag())) + "i";
    return s + ", r=" + std::to_string(r);
}

inline double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i)
        b = b * (n - k + i) / i;
    return b;
}

/// (x - y^2, y - xy): the diagonal-degenerate quadratic part shared by g and h.
inline std::map<int, Component> axis_quadratic() {
    return {{2, Component{HomPoly2(2, {0.0, 0.0, -1.0}), HomPoly2(2, {0.0, -1.0, 0.0})}}};
}

}  // namespace detail

/// Coefficient-exact instance of a named family. Throws family_error when the
/// parameters leave the family's hypotheses.
inline PolyMap2 builtin(Family family, cplx a = {}, int r = 0) {
    using detail::describe;
    switch (family) {
    case Family::f:
        // (z(1-(z-w)), w(1+(z-w)))
        return PolyMap2({{2, Component{HomPoly2(2, {-1.0, 1.0, 0.0}), HomPoly2(2, {0.0, 1.0, -1.0})}}});
    case Family::ftilde:
        return PolyMap2(detail::axis_quadratic());
    case Family::g: {
        const bool case1 = a != cplx{} && r >= 3;
        const bool case2 = r == 2 && (a.imag() != 0.0 || a.real() < 0.0);
        if (!case1 && !case2)
            throw family_error("family g requires (a != 0 and r >= 3) or (a not in R>=0 and r = 2); got " +
                               describe(a, r));
        auto comps = detail::axis_quadratic();
        std::vector<cplx> top(static_cast<std::size_t>(r) + 2);
        top[0] = a;
        comps.emplace(r + 1, Component{HomPoly2(r + 1, std::move(top)), HomPoly2::zero(r + 1)});
        return PolyMap2(std::move(comps));
    }
    case Family::h: {
        if (!(a.imag() == 0.0 && a.real() > 0.0))
            throw family_error("family h requires a real and a > 0; got " + describe(a, 2));
        auto comps = detail::axis_quadratic();
        comps.emplace(3, Component{HomPoly2(3, {a, 0.0, 0.0, 0.0}), HomPoly2::zero(3)});
        return PolyMap2(std::move(comps));
    }
    case Family::gtilde: {
        if (r < 2)
            throw family_error("family gtilde requires r >= 2; got " + describe(a, r));
        std::map<int, Component> comps{
            {2, Component{HomPoly2(2, {-1.0, 1.0, 0.0}), HomPoly2(2, {0.0, 1.0, -1.0})}}};
        if (a != cplx{}) {
            // (a/2)(z+w)^(r+1) added to both coordinates.
            const int d = r + 1;
            std::vector<cplx> c(static_cast<std::size_t>(d) + 1);
            for (int i = 0; i <= d; ++i)
                c[static_cast<std::size_t>(i)] = 0.5 * a * detail::binomial(d, i);
            comps.emplace(d, Component{HomPoly2(d, c), HomPoly2(d, c)});
        }
        return PolyMap2(std::move(comps));
    }
    }
    throw family_error("unknown family");
}

inline PolyMap2 builtin(const FamilySpec& spec) { return builtin(spec.family, spec.a, spec.r); }

/// Either expression text or a named family with parameters.
struct MapSource {
    std::variant<std::string, FamilySpec> source;

    ParsedMap instantiate() const {
        if (const auto* text = std::get_if<std::string>(&source))
            return parse_map_with_chart(*text);
        const auto& spec = std::get<FamilySpec>(source);
        return {builtin(spec), family_chart(spec.family)};
    }
};

/// Parse a constant in the grammar's notation: "1.5", "-2i", "1+2i", "i",
/// "1/3". Throws parse_error.
inline cplx parse_complex(std::string_view text) { return detail::Parser(text).parse_constant(); }

}  // namespace parabolic
