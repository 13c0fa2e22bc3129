#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace parabolic {

using cplx = std::complex<double>;

/// Arithmetic hooks for the complex scalar a computation runs in.
///
/// The core is written once against these hooks and instantiated with
/// std::complex<double> (the normal path), std::complex<long double> (wide
/// exponent range for long rate experiments) and a 256-bit Boost complex for
/// the precision oracle (specialised in oracle.hpp).
template <class C>
struct scalar_traits;

template <class T>
struct scalar_traits<std::complex<T>> {
    using complex_type = std::complex<T>;
    using real_type = T;

    static complex_type from(cplx c) { return {static_cast<T>(c.real()), static_cast<T>(c.imag())}; }
    static cplx to_cplx(const complex_type& c) { return {static_cast<double>(c.real()), static_cast<double>(c.imag())}; }

    // std::complex operator* goes through the Annex G NaN/Inf recovery path
    // (__muldc3), which dominates the iteration cost. Inputs here are finite.
    static complex_type mul(const complex_type& a, const complex_type& b) {
        return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
    }
    static real_type norm(const complex_type& c) { return c.real() * c.real() + c.imag() * c.imag(); }
    static double norm_d(const complex_type& c) { return static_cast<double>(norm(c)); }
    static bool equal(const complex_type& a, const complex_type& b) { return a == b; }
};

template <class C>
inline C cmul(const C& a, const C& b) { return scalar_traits<C>::mul(a, b); }

/// Squared modulus, in double.
template <class C>
inline double norm_d(const C& c) { return scalar_traits<C>::norm_d(c); }

template <class C>
inline cplx to_cplx(const C& c) { return scalar_traits<C>::to_cplx(c); }

inline bool is_finite(cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

}  // namespace parabolic
