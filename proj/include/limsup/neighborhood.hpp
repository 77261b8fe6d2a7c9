#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "covering.hpp"
#include "geometry.hpp"

namespace limsup {

template <class T>
struct PointGeometry {
  std::vector<T> coords;
};

/// The resonant set {A in [0,1]^h : A.q = p}.
struct AffineGeometry {
  std::vector<std::int64_t> q;
  std::int64_t p = 0;
};

/// Target preimage: the word w and its center x(w).
template <class T>
struct CantorPreimageGeometry {
  std::vector<int> word;
  T center{};
};

template <class T>
using FactorGeometry = std::variant<PointGeometry<T>, AffineGeometry, CantorPreimageGeometry<T>>;

/// {A : |A.q - p| < width} inside the factor cube.  width = r*||q||_1 is the
/// sup-metric r-neighbourhood of the hyperplane A.q = p.
struct Slab {
  std::vector<std::int64_t> q;
  std::int64_t p = 0;
  double width = 0.0;

  template <class P>
  bool contains(const P& a, std::size_t offset = 0) const {
    double v = -static_cast<double>(p);
    for (std::size_t k = 0; k < q.size(); ++k) v += static_cast<double>(q[k]) * a[offset + k];
    return std::abs(v) < width;
  }
};

inline std::int64_t l1_norm(const std::vector<std::int64_t>& q) {
  std::int64_t s = 0;
  for (auto v : q) s += v < 0 ? -v : v;
  return s;
}

template <class T>
struct FactorNeighborhood {
  std::vector<BasicBox<T>> boxes;  // factor coordinates
  std::optional<Slab> slab;
};

template <class T>
FactorNeighborhood<T> neighborhood(const FactorGeometry<T>& geometry, const T& radius,
                                   const FactorSpace& factor) {
  if (!(radius > 0)) throw ValidationError("neighborhood: radius must be positive");
  AmbientSpace local({factor});
  FactorNeighborhood<T> out;
  if (const auto* pt = std::get_if<PointGeometry<T>>(&geometry)) {
    if (pt->coords.size() != static_cast<std::size_t>(factor.dim))
      throw ValidationError("neighborhood: point dimension does not match the factor");
    CenteredRect<T> r{pt->coords, std::vector<T>(factor.dim, radius)};
    out.boxes = to_boxes(r, local);
  } else if (const auto* cp = std::get_if<CantorPreimageGeometry<T>>(&geometry)) {
    CenteredRect<T> r{{cp->center}, {radius}};
    out.boxes = to_boxes(r, local);
  } else {
    const auto& af = std::get<AffineGeometry>(geometry);
    if (af.q.size() != static_cast<std::size_t>(factor.dim))
      throw ValidationError("neighborhood: q dimension does not match the factor");
    if (l1_norm(af.q) == 0) throw ValidationError("neighborhood: affine geometry needs q != 0");
    out.slab = Slab{af.q, af.p, to_double(radius) * static_cast<double>(l1_norm(af.q))};
    // An axis-aligned slab is a box.
    std::size_t nz = 0, axis = 0;
    for (std::size_t k = 0; k < af.q.size(); ++k)
      if (af.q[k] != 0) {
        ++nz;
        axis = k;
      }
    if (nz == 1) {
      T qa = T(af.q[axis]);
      T c = T(T(af.p) / qa);
      auto pieces = axis_pieces(c, radius, false);
      for (const auto& iv : pieces) {
        if (!(iv.lo < iv.hi)) continue;
        std::vector<Interval<T>> axes(factor.dim, Interval<T>{T(0), T(1)});
        axes[axis] = iv;
        out.boxes.emplace_back(std::move(axes));
      }
    }
  }
  return out;
}

/// Exact area of (U slabs) n clip for slabs in the plane.  Vertical
/// decomposition at every line/line and line/edge crossing; between events
/// the covered y-length is linear in x so the midpoint rule is exact.
inline double slab_union_area(const std::vector<Slab>& slabs, const Box& clip) {
  const double x0 = clip[0].lo, x1 = clip[0].hi, y0 = clip[1].lo, y1 = clip[1].hi;
  if (!(x0 < x1) || !(y0 < y1) || slabs.empty()) return 0.0;
  struct Line {
    double a, b, c;  // a x + b y = c
  };
  std::vector<Line> lines;
  std::vector<double> ev{x0, x1};
  for (const auto& s : slabs) {
    if (s.q.size() != 2) throw ValidationError("slab_union_area: slabs must be planar");
    double a = s.q[0], b = s.q[1];
    for (double c : {s.p - s.width, s.p + s.width}) {
      lines.push_back({a, b, c});
      if (b == 0.0) ev.push_back(c / a);
      else if (a != 0.0) {
        ev.push_back((c - b * y0) / a);
        ev.push_back((c - b * y1) / a);
      }
    }
  }
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const auto& L = lines[i];
      const auto& M = lines[j];
      double det = L.a * M.b - L.b * M.a;
      if (det == 0.0) continue;
      ev.push_back((L.c * M.b - L.b * M.c) / det);
    }
  ev.erase(std::remove_if(ev.begin(), ev.end(), [&](double x) { return x < x0 || x > x1; }),
           ev.end());
  std::sort(ev.begin(), ev.end());
  ev.erase(std::unique(ev.begin(), ev.end()), ev.end());

  std::vector<std::pair<double, double>> spans;
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    double xm = 0.5 * (ev[k] + ev[k + 1]);
    spans.clear();
    for (const auto& s : slabs) {
      double a = s.q[0], b = s.q[1];
      double lo, hi;
      if (b == 0.0) {
        double v = a * xm - s.p;
        if (std::abs(v) >= s.width) continue;
        lo = y0;
        hi = y1;
      } else {
        lo = (s.p - s.width - a * xm) / b;
        hi = (s.p + s.width - a * xm) / b;
        if (hi < lo) std::swap(lo, hi);
        lo = std::max(lo, y0);
        hi = std::min(hi, y1);
        if (!(lo < hi)) continue;
      }
      spans.push_back({lo, hi});
    }
    std::sort(spans.begin(), spans.end());
    double len = 0.0, cur_lo = 0.0, cur_hi = -1.0;
    for (const auto& [lo, hi] : spans) {
      if (lo > cur_hi) {
        if (cur_hi > cur_lo) len += cur_hi - cur_lo;
        cur_lo = lo;
        cur_hi = hi;
      } else {
        cur_hi = std::max(cur_hi, hi);
      }
    }
    if (cur_hi > cur_lo) len += cur_hi - cur_lo;
    area += len * (ev[k + 1] - ev[k]);
  }
  return area;
}

}  // namespace limsup
