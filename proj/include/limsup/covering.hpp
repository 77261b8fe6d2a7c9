#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "geometry.hpp"
#include "sweep.hpp"

namespace limsup {

/// Pieces of [c - h, c + h] on one axis: wrapped on torus axes, clipped otherwise.
template <class T>
std::vector<Interval<T>> axis_pieces(const T& c, const T& h, bool torus) {
  T lo = T(c - h), hi = T(c + h);
  if (!torus) {
    lo = max_of(lo, T(0));
    hi = min_of(hi, T(1));
    if (hi < lo) return {};
    return {{lo, hi}};
  }
  if (!(T(hi - lo) < 1)) return {{T(0), T(1)}};
  // shift so that lo is in [0,1)
  while (lo < 0) {
    lo += 1;
    hi += 1;
  }
  while (!(lo < 1)) {
    lo -= 1;
    hi -= 1;
  }
  if (!(hi > 1)) return {{lo, hi}};
  return {{T(0), T(hi - 1)}, {lo, T(1)}};
}

/// Boxes covering the `scale`-enlargement of a centered rectangle.
template <class T>
std::vector<BasicBox<T>> to_boxes(const CenteredRect<T>& r, const AmbientSpace& space,
                                  const T& scale = T(1)) {
  const std::size_t D = r.center.size();
  if (D != space.total_dim() || r.half.size() != D)
    throw ValidationError("rectangle dimension does not match the space");
  std::vector<std::vector<Interval<T>>> per(D);
  for (std::size_t a = 0; a < D; ++a) {
    per[a] = axis_pieces(r.center[a], T(scale * r.half[a]), space.axis_torus(a));
    if (per[a].empty()) return {};
  }
  std::vector<BasicBox<T>> out;
  std::vector<std::size_t> idx(D, 0);
  while (true) {
    std::vector<Interval<T>> axes(D);
    for (std::size_t a = 0; a < D; ++a) axes[a] = per[a][idx[a]];
    out.emplace_back(std::move(axes));
    std::size_t a = 0;
    for (; a < D; ++a) {
      if (++idx[a] < per[a].size()) break;
      idx[a] = 0;
    }
    if (a == D) break;
  }
  return out;
}

/// Open `scale`-enlargements of two same-size rectangles are disjoint.
template <class T>
bool enlargements_disjoint(const CenteredRect<T>& a, const CenteredRect<T>& b,
                           const AmbientSpace& space, const T& scale) {
  for (std::size_t j = 0; j < a.center.size(); ++j) {
    T d = space.axis_torus(j) ? circle_distance(a.center[j], b.center[j])
                              : abs_of(T(a.center[j] - b.center[j]));
    if (!(d < T(2 * scale * a.half[j]))) return true;
  }
  return false;
}

/// Greedy disjoint subfamily in lexicographic center order; returns indices
/// into `rects`.
template <class T>
std::vector<std::size_t> five_r_cover_indices(const std::vector<CenteredRect<T>>& rects,
                                              const AmbientSpace& space, const T& scale = T(5)) {
  if (rects.empty()) return {};
  for (const auto& r : rects) {
    if (r.center.size() != space.total_dim() || r.half.size() != space.total_dim())
      throw ValidationError("five_r_cover: rectangle dimension does not match the space");
    if (r.half != rects.front().half)
      throw ValidationError("five_r_cover: rectangles must have identical half-widths");
  }
  std::vector<std::size_t> order(rects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return rects[i].center < rects[j].center;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool ok = true;
    for (std::size_t k : kept)
      if (!enlargements_disjoint(rects[i], rects[k], space, scale)) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(i);
  }
  return kept;
}

template <class T>
std::vector<CenteredRect<T>> five_r_cover(const std::vector<CenteredRect<T>>& rects,
                                          const AmbientSpace& space, const T& scale = T(5)) {
  std::vector<CenteredRect<T>> out;
  for (std::size_t i : five_r_cover_indices(rects, space, scale)) out.push_back(rects[i]);
  return out;
}

/// Same axes and wrap flags, Lebesgue measure on every factor.
inline AmbientSpace lebesgue_shadow(const AmbientSpace& space) {
  std::vector<FactorSpace> f;
  for (const auto& x : space.factors()) f.push_back(FactorSpace::lebesgue(x.dim, 0.0, x.torus));
  return AmbientSpace(std::move(f));
}

/// Sum over inputs R of Leb(R \ U 5*scale-enlarged kept).  Zero iff the kept
/// enlargements cover the union of the inputs.
template <class T>
T cover_residual(const std::vector<CenteredRect<T>>& inputs, const std::vector<CenteredRect<T>>& kept,
                 const AmbientSpace& space, const T& scale = T(5)) {
  std::vector<BasicBox<T>> big;
  for (const auto& k : kept)
    for (auto& b : to_boxes(k, space, T(5 * scale))) big.push_back(std::move(b));
  const AmbientSpace leb = lebesgue_shadow(space);
  T total(0);
  for (const auto& r : inputs) {
    auto pieces = to_boxes(r, space);
    std::vector<BasicBox<T>> near;
    for (const auto& b : big)
      for (const auto& p : pieces)
        if (p.intersect(b)) {
          near.push_back(b);
          break;
        }
    total += exact_difference_measure(pieces, near, leb).value;
  }
  return total;
}

}  // namespace limsup
