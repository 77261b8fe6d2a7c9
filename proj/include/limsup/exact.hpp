#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace limsup {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

template <class T>
inline constexpr bool is_exact_v = !std::is_floating_point_v<T>;

template <class T>
double to_double(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<double>(v);
  } else {
    return v.template convert_to<double>();
  }
}

/// Every finite double is a dyadic rational, so this conversion is exact.
template <class T>
T from_double(double v) {
  return T(v);
}

template <class T>
T abs_of(const T& v) {
  if (v < 0) return T(-v);
  return v;
}

template <class T>
const T& min_of(const T& a, const T& b) {
  return b < a ? b : a;
}

template <class T>
const T& max_of(const T& a, const T& b) {
  return a < b ? b : a;
}

/// Distance on the circle R/Z for coordinates in [0,1].
template <class T>
T circle_distance(const T& a, const T& b) {
  T d = abs_of(T(a - b));
  T wrap = T(1 - d);
  return wrap < d ? wrap : d;
}

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  return Rational(BigInt(num), BigInt(den));
}

/// floor of a rational as an integer.
inline BigInt floor_of(const Rational& v) {
  BigInt n = boost::multiprecision::numerator(v);
  BigInt d = boost::multiprecision::denominator(v);
  BigInt q = n / d;
  if (n % d != 0 && n < 0) q -= 1;
  return q;
}

template <class T>
std::int64_t nearest_integer(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<std::int64_t>(std::floor(v + 0.5));
  } else {
    return floor_of(Rational(v + Rational(1, 2))).template convert_to<std::int64_t>();
  }
}

}  // namespace limsup
