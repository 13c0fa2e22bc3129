#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "orbit.hpp"
#include "scalar.hpp"

namespace parabolic {

/// 256-bit binary floating point, round to nearest.
using oracle_real = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>, boost::multiprecision::et_off>;
using oracle_complex = boost::multiprecision::number<
    boost::multiprecision::complex_adaptor<
        boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>>,
    boost::multiprecision::et_off>;

template <>
struct scalar_traits<oracle_complex> {
    using complex_type = oracle_complex;
    using real_type = oracle_real;

    static complex_type from(cplx c) { return complex_type(oracle_real(c.real()), oracle_real(c.imag())); }
    static cplx to_cplx(const complex_type& c) {
        return {c.real().convert_to<double>(), c.imag().convert_to<double>()};
    }
    static complex_type mul(const complex_type& a, const complex_type& b) { return a * b; }
    static real_type norm(const complex_type& c) { return c.real() * c.real() + c.imag() * c.imag(); }
    static double norm_d(const complex_type& c) { return norm(c).convert_to<double>(); }
    static bool equal(const complex_type& a, const complex_type& b) { return a == b; }
};

using OraclePoint = basic_point2<oracle_complex>;

inline OraclePoint to_oracle(Complex2 p) {
    return {scalar_traits<oracle_complex>::from(p.z), scalar_traits<oracle_complex>::from(p.w)};
}

/// Same iteration semantics as iterate(), carried out in 256 bits.
inline OraclePoint oracle_iterate(const PolyMap2& map, Complex2 start, long long n) {
    if (n < 0)
        throw invalid_argument("oracle_iterate: n must be non-negative");
    const CompiledMap<oracle_complex> f(map);
    auto ws = f.make_workspace();
    OraclePoint p = to_oracle(start);
    for (long long k = 0; k < n; ++k) {
        p = f(p, ws);
        if (!(norm(p) <= 1e100))
            throw escape_error(k + 1);
    }
    return p;
}

/// classify() carried out in 256 bits.
inline OrbitOutcome oracle_classify(const PolyMap2& map, Complex2 start, const OrbitParams& params) {
    return OrbitClassifier<oracle_complex>(map, params).classify(to_oracle(start));
}

}  // namespace parabolic
