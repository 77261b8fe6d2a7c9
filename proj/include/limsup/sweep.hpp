#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "cantor.hpp"
#include "geometry.hpp"

namespace limsup {

struct SweepOptions {
  std::size_t max_dimension = 4;
  std::uint64_t max_cells = std::uint64_t(1) << 26;
  int cantor_depth = 40;
};

namespace detail {

template <class T>
void check_boxes(const std::vector<BasicBox<T>>& boxes, std::size_t dim, const char* what) {
  for (const auto& b : boxes)
    if (b.dim() != dim)
      throw ValidationError(std::string(what) + ": box dimension does not match the space");
}

template <class T>
std::size_t index_of(const std::vector<T>& coords, const T& v) {
  return static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), v) - coords.begin());
}

}  // namespace detail

/// mu(U covered \ U excluded) by coordinate compression over the endpoints
/// of all boxes.  Cantor axes measure each cell segment with
/// cantor_box_measure; their truncation mass accumulates in the error.
template <class T>
Bracket<T> exact_difference_measure(const std::vector<BasicBox<T>>& covered,
                                    const std::vector<BasicBox<T>>& excluded,
                                    const AmbientSpace& space, const SweepOptions& opt = {}) {
  const std::size_t D = space.total_dim();
  detail::check_boxes(covered, D, "union_measure");
  detail::check_boxes(excluded, D, "union_measure");
  if (D > opt.max_dimension)
    throw UseStatisticalError("use-statistical: dimension " + std::to_string(D) +
                              " exceeds the exact sweep cutoff");

  std::vector<const BasicBox<T>*> cov;
  for (const auto& b : covered)
    if (!b.degenerate()) cov.push_back(&b);
  Bracket<T> out{T(0), T(0)};
  if (cov.empty()) return out;

  std::vector<std::vector<T>> coords(D);
  std::vector<Interval<T>> hull(D);
  for (std::size_t a = 0; a < D; ++a) {
    hull[a] = (*cov[0])[a];
    for (const auto* b : cov) {
      hull[a].lo = min_of(hull[a].lo, (*b)[a].lo);
      hull[a].hi = max_of(hull[a].hi, (*b)[a].hi);
      coords[a].push_back((*b)[a].lo);
      coords[a].push_back((*b)[a].hi);
    }
  }
  std::vector<std::vector<Interval<T>>> exc;
  for (const auto& b : excluded) {
    std::vector<Interval<T>> c(D);
    bool empty = false;
    for (std::size_t a = 0; a < D && !empty; ++a) {
      c[a].lo = max_of(b[a].lo, hull[a].lo);
      c[a].hi = min_of(b[a].hi, hull[a].hi);
      empty = !(c[a].lo < c[a].hi);
    }
    if (empty) continue;
    for (std::size_t a = 0; a < D; ++a) {
      coords[a].push_back(c[a].lo);
      coords[a].push_back(c[a].hi);
    }
    exc.push_back(std::move(c));
  }

  std::vector<std::size_t> n(D), stride(D);
  std::uint64_t cells = 1, grid = 1;
  for (std::size_t a = 0; a < D; ++a) {
    auto& c = coords[a];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    n[a] = c.size() - 1;
    cells *= n[a];
    if (cells > opt.max_cells)
      throw UseStatisticalError("use-statistical: exact sweep needs more than " +
                                std::to_string(opt.max_cells) + " cells");
  }
  for (std::size_t a = 0; a < D; ++a) {
    stride[a] = grid;
    grid *= n[a] + 1;
  }

  // Difference arrays: +-1 at the 2^D corners of every box, then prefix sums.
  std::vector<std::int32_t> cnt(grid, 0), ex(exc.empty() ? 0 : grid, 0);
  auto stamp = [&](std::vector<std::int32_t>& arr, const std::vector<Interval<T>>& axes) {
    std::vector<std::size_t> lo(D), hi(D);
    for (std::size_t a = 0; a < D; ++a) {
      lo[a] = detail::index_of(coords[a], axes[a].lo);
      hi[a] = detail::index_of(coords[a], axes[a].hi);
      if (lo[a] == hi[a]) return;
    }
    for (std::size_t mask = 0; mask < (std::size_t(1) << D); ++mask) {
      std::size_t idx = 0;
      int sign = 1;
      for (std::size_t a = 0; a < D; ++a) {
        if (mask >> a & 1) {
          idx += hi[a] * stride[a];
          sign = -sign;
        } else {
          idx += lo[a] * stride[a];
        }
      }
      arr[idx] += sign;
    }
  };
  for (const auto* b : cov) stamp(cnt, b->axes());
  for (const auto& e : exc) stamp(ex, e);
  auto prefix = [&](std::vector<std::int32_t>& arr) {
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t i = 0; i < grid; ++i)
        if ((i / stride[a]) % (n[a] + 1) != 0) arr[i] += arr[i - stride[a]];
  };
  prefix(cnt);
  if (!exc.empty()) prefix(ex);

  // Per-axis segment measures.
  std::vector<std::vector<Bracket<T>>> seg(D);
  bool bracketed = false;
  for (std::size_t a = 0; a < D; ++a) {
    const CantorSpec* cs = space.axis_cantor(a);
    for (std::size_t i = 0; i < n[a]; ++i) {
      Interval<T> iv{coords[a][i], coords[a][i + 1]};
      if (cs) {
        seg[a].push_back(cantor_box_measure(iv, *cs, opt.cantor_depth));
        bracketed = true;
      } else {
        seg[a].push_back({iv.length(), T(0)});
      }
    }
  }

  std::vector<std::size_t> idx(D, 0);
  for (std::uint64_t c = 0; c < cells; ++c) {
    std::size_t g = 0;
    for (std::size_t a = 0; a < D; ++a) g += idx[a] * stride[a];
    if (cnt[g] > 0 && (exc.empty() || ex[g] == 0)) {
      T lo(1);
      for (std::size_t a = 0; a < D; ++a) lo *= seg[a][idx[a]].value;
      out.value += lo;
      if (bracketed) {
        T hi(1);
        for (std::size_t a = 0; a < D; ++a) hi *= T(seg[a][idx[a]].value + seg[a][idx[a]].error);
        out.error += T(hi - lo);
      }
    }
    for (std::size_t a = 0; a < D; ++a) {
      if (++idx[a] < n[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

template <class T>
Bracket<T> exact_union_measure(const std::vector<BasicBox<T>>& boxes, const AmbientSpace& space,
                               const SweepOptions& opt = {}) {
  return exact_difference_measure<T>(boxes, {}, space, opt);
}

/// Pairwise intersections; the union of the result is (U a) n (U b).
template <class T>
std::vector<BasicBox<T>> intersect_unions(const std::vector<BasicBox<T>>& a,
                                          const std::vector<BasicBox<T>>& b) {
  std::vector<BasicBox<T>> out;
  for (const auto& x : a)
    for (const auto& y : b)
      if (auto z = x.intersect(y)) out.push_back(std::move(*z));
  return out;
}

template <class T>
MeasureEstimate union_measure(const std::vector<BasicBox<T>>& boxes, const AmbientSpace& space,
                              const SweepOptions& opt = {}) {
  Bracket<T> b = exact_union_measure(boxes, space, opt);
  MeasureEstimate m;
  m.value = to_double(b.value);
  m.error = to_double(b.error);
  m.method = Method::ExactSweep;
  return m;
}

}  // namespace limsup
