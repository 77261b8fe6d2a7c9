#pragma once

#include "geometry.hpp"

namespace limsup {

namespace detail {

template <class T>
void cantor_descend(const Interval<T>& iv, const CantorSpec& spec, const T& left, const T& width,
                    const T& mass, int level, int depth, Bracket<T>& acc) {
  T right = T(left + width);
  if (!(iv.lo < right) || !(left < iv.hi)) return;
  if (!(left < iv.lo) && !(iv.hi < right)) {
    acc.value += mass;
    return;
  }
  if (level == depth) {
    acc.error += mass;
    return;
  }
  T w = T(width / spec.base);
  T m = T(mass / static_cast<int>(spec.digits.size()));
  for (int k : spec.digits) cantor_descend(iv, spec, T(left + k * w), w, m, level + 1, depth, acc);
}

}  // namespace detail

/// Mass of the fully contained cylinders down to `depth`, and the mass of
/// the cylinders still cut by an endpoint at that depth.
template <class T>
Bracket<T> cantor_box_measure(const Interval<T>& iv, const CantorSpec& spec, int depth) {
  if (iv.lo < 0 || iv.hi > 1 || iv.hi < iv.lo)
    throw ValidationError("cantor_box_measure: interval must satisfy 0 <= lo <= hi <= 1");
  if (depth < 1) throw ValidationError("cantor_box_measure: depth must be >= 1");
  Bracket<T> acc{T(0), T(0)};
  if (!(iv.lo < iv.hi)) return acc;  // the measure has no atoms
  detail::cantor_descend(iv, spec, T(0), T(1), T(1), 0, depth, acc);
  return acc;
}

/// Smallest cylinder [left, left + b^-k] containing [lo, hi]; k <= max_level.
inline std::pair<double, double> enclosing_cylinder(double lo, double hi, int base, int max_level) {
  double left = 0.0, width = 1.0;
  for (int k = 0; k < max_level; ++k) {
    double w = width / base;
    int a = static_cast<int>(std::floor((lo - left) / w));
    int b = static_cast<int>(std::floor((hi - left) / w));
    if (a != b || a < 0 || a >= base) break;
    left += a * w;
    width = w;
  }
  return {left, width};
}

}  // namespace limsup
