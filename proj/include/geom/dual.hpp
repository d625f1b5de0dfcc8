#pragma once

// Forward-mode dual numbers a + b*eps with eps^2 = 0. Nesting
// Dual<Dual<double>> gives exact mixed second derivatives.

#include <cmath>
#include <type_traits>

namespace geom {

template <class T>
struct Dual {
    T v{};  // value
    T d{};  // derivative along the seeded direction

    constexpr Dual() = default;
    constexpr Dual(double c) : v(c), d(0.0) {}  // NOLINT: constants promote implicitly
    constexpr Dual(T value, T deriv) : v(value), d(deriv) {}
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

// Value of the innermost scalar, for branch decisions and finiteness checks.
inline double scalar_value(double x) { return x; }
template <class T>
double scalar_value(const Dual<T>& x) {
    return scalar_value(x.v);
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) {
    return all_finite(x.v) && all_finite(x.d);
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}
template <class T>
Dual<T> operator*(double s, const Dual<T>& a) { return {s * a.v, s * a.d}; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double s) { return {a.v * s, a.d * s}; }
template <class T>
Dual<T> operator+(const Dual<T>& a, double s) { return {a.v + s, a.d}; }
template <class T>
Dual<T> operator+(double s, const Dual<T>& a) { return {s + a.v, a.d}; }
template <class T>
Dual<T> operator-(double s, const Dual<T>& a) { return {s - a.v, -a.d}; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double s) { return {a.v - s, a.d}; }

template <class T>
Dual<T> sin(const Dual<T>& a) {
    using std::cos, std::sin;
    return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
    using std::cos, std::sin;
    return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
    using std::cosh, std::sinh;
    return {sinh(a.v), cosh(a.v) * a.d};
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
    using std::cosh, std::sinh;
    return {cosh(a.v), sinh(a.v) * a.d};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
    using std::exp;
    T e = exp(a.v);
    return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
    using std::log;
    return {log(a.v), a.d / a.v};
}

/// x^c for a constant exponent; integer exponents accept negative bases.
inline double powc(double x, double c) { return std::pow(x, c); }
template <class T>
Dual<T> powc(const Dual<T>& a, double c) {
    if (c == 0.0) return Dual<T>(1.0);
    if (c == 1.0) return a;
    return {powc(a.v, c), c * powc(a.v, c - 1.0) * a.d};
}

/// x^y with a variable exponent, via exp(y ln x).
template <class T>
Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
    return exp(b * log(a));
}

}  // namespace geom
