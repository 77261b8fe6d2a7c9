#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "covering.hpp"
#include "membership.hpp"
#include "monte_carlo.hpp"
#include "neighborhood.hpp"
#include "rates.hpp"
#include "sweep.hpp"
#include "systems.hpp"

namespace limsup {

struct UbiquityOptions {
  std::uint64_t exact_items = 2'000'000;  // boxes allowed on the exact path
  std::size_t slab_cap = 300;
  std::uint64_t mc_samples = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  SweepOptions sweep;
};

/// mu(ball) as a bracket.
template <class T>
Bracket<T> box_measure(const BasicBox<T>& b, const AmbientSpace& space, int depth = 40) {
  Bracket<T> lo{T(1), T(0)};
  T hi(1);
  for (std::size_t a = 0; a < b.dim(); ++a) {
    Bracket<T> s{b[a].length(), T(0)};
    if (const CantorSpec* cs = space.axis_cantor(a)) s = cantor_box_measure(b[a], *cs, depth);
    lo.value *= s.value;
    hi *= T(s.value + s.error);
  }
  lo.error = T(hi - lo.value);
  return lo;
}

namespace detail {

template <class T>
MeasureEstimate ratio_of(const Bracket<T>& num, const Bracket<T>& den) {
  if (!(den.value + den.error > 0)) throw ValidationError("ubiquity_ratio: ball has zero measure");
  double nv = to_double(num.value), ne = to_double(num.error);
  double dv = to_double(den.value), de = to_double(den.error);
  MeasureEstimate m;
  m.method = Method::ExactSweep;
  if (dv > 0) {
    m.value = std::min(1.0, nv / dv);
    double hi = std::min(1.0, (nv + ne) / dv), lo = nv / (dv + de);
    m.error = std::max(hi - m.value, m.value - lo);
  } else {
    m.value = 0.0;
    m.error = 1.0;
  }
  return m;
}

inline std::uint64_t gcd_u(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

// Integers p in [0, q] with p/q within circle distance < r of [lo, hi].
inline std::vector<std::int64_t> near_numerators(std::int64_t q, double lo, double hi, double r) {
  std::vector<std::int64_t> out;
  auto add_range = [&](double a, double b) {
    auto p0 = static_cast<std::int64_t>(std::floor(a * q)) - 1;
    auto p1 = static_cast<std::int64_t>(std::ceil(b * q)) + 1;
    for (std::int64_t p = std::max<std::int64_t>(p0, 0); p <= std::min(p1, q); ++p) out.push_back(p);
  };
  add_range(lo - r, hi + r);
  if (lo - r < 0) add_range(1 + lo - r, 1);
  if (hi + r > 1) add_range(0, hi + r - 1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Boxes (double) of the rational level inside the ball, or nullopt if the
/// exact budget is exceeded.
inline std::optional<std::vector<Box>> rational_level_boxes(const RationalFamily& rf, const Family& f,
                                                            const RatePair& rates, const Box& ball, long n,
                                                            std::uint64_t budget) {
  auto [l, u] = level_bounds(f, rates.levels, n);
  const int d = rf.d;
  std::vector<double> r(d);
  for (int i = 0; i < d; ++i) r[i] = rates.rho_at(i, n);
  AmbientSpace space = ambient_space(f);
  // count first
  long double count = 0;
  for (std::int64_t q = std::max<std::int64_t>(l, 1); q <= u; ++q) {
    long double c = 1;
    for (int i = 0; i < d; ++i) {
      double w = (ball[i].hi - ball[i].lo + 2 * r[i]) * q + 3;
      c *= std::min<long double>(w, q + 1);
    }
    count += c;
    if (count > budget) return std::nullopt;
  }
  std::vector<Box> out;
  std::unordered_set<std::string> seen;
  for (std::int64_t q = std::max<std::int64_t>(l, 1); q <= u; ++q) {
    std::vector<std::vector<std::int64_t>> ps(d);
    for (int i = 0; i < d; ++i) ps[i] = near_numerators(q, ball[i].lo, ball[i].hi, r[i]);
    std::vector<std::size_t> idx(d, 0);
    bool empty = false;
    for (const auto& v : ps) empty = empty || v.empty();
    if (empty) continue;
    while (true) {
      // dedupe reduced points: identical boxes at one level
      std::string key;
      CenteredRect<double> rect;
      for (int i = 0; i < d; ++i) {
        std::int64_t p = ps[i][idx[i]];
        std::uint64_t g = gcd_u(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(q));
        std::int64_t a = p / static_cast<std::int64_t>(g), b = q / static_cast<std::int64_t>(g);
        if (a == b) a = 0, b = 1;  // 1 == 0 on the circle
        key += std::to_string(a) + "/" + std::to_string(b) + ",";
        rect.center.push_back(static_cast<double>(p) / static_cast<double>(q));
        rect.half.push_back(r[i]);
      }
      if (seen.insert(key).second)
        for (auto& b : to_boxes(rect, space))
          if (auto c = b.intersect(ball)) out.push_back(std::move(*c));
      int i = d - 1;
      for (; i >= 0; --i) {
        if (++idx[i] < ps[i].size()) break;
        idx[i] = 0;
      }
      if (i < 0) break;
    }
  }
  return out;
}

}  // namespace detail

/// mu(B n U_{alpha in J_n} prod Delta(R_{alpha,i}, rho_i(u_n))) / mu(B).
inline MeasureEstimate ubiquity_ratio(const Family& family, const RatePair& rates, const ExactBox& ball, long n,
                                      const UbiquityOptions& opt = {}) {
  AmbientSpace space = ambient_space(family);
  if (ball.dim() != space.total_dim()) throw ValidationError("ubiquity_ratio: ball dimension does not match");
  Box fball = ball.convert<double>();

  if (auto sf = std::get_if<ShrinkingFamily>(&family)) {
    // J_n is a product, so the union factorises.
    Bracket<Rational> num{Rational(1), Rational(0)}, den{Rational(1), Rational(0)};
    Rational num_hi(1), den_hi(1);
    for (std::size_t i = 0; i < sf->factors.size(); ++i) {
      AmbientSpace local({space.factors()[i]});
      Rational r = rates.rho_exact(i, n);
      auto items = shrinking_factor_items(sf->factors[i], sf->target[i], static_cast<int>(n));
      if (items.size() > opt.exact_items) throw SizeError("ubiquity_ratio: factor level too large", items.size());
      ExactBox bi(std::vector<Interval<Rational>>{ball[i]});
      std::vector<ExactBox> boxes;
      for (const auto& g : items)
        for (auto& b : to_boxes(CenteredRect<Rational>{{g.center}, {r}}, local))
          if (auto c = b.intersect(bi)) boxes.push_back(std::move(*c));
      auto m = exact_union_measure(boxes, local, opt.sweep);
      auto mb = box_measure(bi, local, opt.sweep.cantor_depth);
      num_hi *= Rational(m.value + m.error);
      den_hi *= Rational(mb.value + mb.error);
      num.value *= m.value;
      den.value *= mb.value;
    }
    num.error = Rational(num_hi - num.value);
    den.error = Rational(den_hi - den.value);
    return detail::ratio_of(num, den);
  }

  std::vector<double> radii;
  for (std::size_t i = 0; i < family_factors(family); ++i) radii.push_back(rates.rho_at(i, n));
  auto mc = [&]() {
    LevelMembership member(family, rates.levels, n, radii);
    return mc_fraction(member, space, fball, opt.mc_samples, opt.seed, opt.workers);
  };
  Bracket<double> den = box_measure(fball, space);

  if (auto rf = std::get_if<RationalFamily>(&family)) {
    auto boxes = detail::rational_level_boxes(*rf, family, rates, fball, n, opt.exact_items);
    if (!boxes) return mc();
    try {
      return detail::ratio_of(exact_union_measure(*boxes, space, opt.sweep), den);
    } catch (const UseStatisticalError&) {
      return mc();
    }
  }

  const auto& lf = std::get<LinearFormsFamily>(family);
  if (!(lf.d == 1 && lf.h == 2) && lf.h != 1) return mc();
  // items meeting the ball
  QWindow w = linear_window(lf, n);
  std::vector<std::vector<std::int64_t>> vals;
  long double qcount = 1;
  for (int k = 0; k < lf.h; ++k) {
    vals.push_back(window_values(w.lo[k], w.hi[k]));
    qcount *= vals.back().size();
  }
  if (qcount * (2 * lf.h * (long double)*std::max_element(w.hi.begin(), w.hi.end()) + 1) > opt.exact_items * 4.0L)
    return mc();
  std::vector<Slab> slabs;
  std::vector<std::vector<Slab>> per_factor(lf.d);
  std::vector<std::size_t> qi(lf.h, 0);
  while (true) {
    std::vector<std::int64_t> q(lf.h);
    std::int64_t mx = 0;
    for (int k = 0; k < lf.h; ++k) {
      q[k] = vals[k][qi[k]];
      mx = std::max(mx, q[k] < 0 ? -q[k] : q[k]);
    }
    if (mx > 0) {
      double l1 = static_cast<double>(l1_norm(q));
      for (int i = 0; i < lf.d; ++i) {
        // range of A_i.q over the ball factor
        double lo = 0, hi = 0;
        for (int k = 0; k < lf.h; ++k) {
          double a = fball[i * lf.h + k].lo * q[k], b = fball[i * lf.h + k].hi * q[k];
          lo += std::min(a, b);
          hi += std::max(a, b);
        }
        double wdt = radii[i] * l1;
        auto p0 = std::max<std::int64_t>(-lf.h * mx, static_cast<std::int64_t>(std::floor(lo - wdt)));
        auto p1 = std::min<std::int64_t>(lf.h * mx, static_cast<std::int64_t>(std::ceil(hi + wdt)));
        for (std::int64_t p = p0; p <= p1; ++p) per_factor[i].push_back(Slab{q, p, wdt});
      }
    }
    int k = lf.h - 1;
    for (; k >= 0; --k) {
      if (++qi[k] < vals[k].size()) break;
      qi[k] = 0;
    }
    if (k < 0) break;
  }
  if (lf.h == 2) {
    if (per_factor[0].size() > opt.slab_cap) return mc();
    slabs = per_factor[0];
    double area = slab_union_area(slabs, fball);
    MeasureEstimate m;
    m.value = std::min(1.0, area / den.value);
    m.error = 1e-12;
    m.method = Method::ExactSweep;
    return m;
  }
  // h = 1: every slab is an interval; the level is a union of boxes only if
  // d = 1, otherwise the product over factors must pair up q's.
  std::vector<Box> boxes;
  if (lf.d == 1) {
    for (const auto& s : per_factor[0]) {
      double c = static_cast<double>(s.p) / static_cast<double>(s.q[0]);
      double r = radii[0];
      Box b({{std::clamp(c - r, 0.0, 1.0), std::clamp(c + r, 0.0, 1.0)}});
      if (auto x = b.intersect(fball)) boxes.push_back(*x);
    }
    return detail::ratio_of(exact_union_measure(boxes, space, opt.sweep), den);
  }
  return mc();
}

struct UbiquityEntry {
  std::size_t ball_id = 0;
  long n = 0;
  MeasureEstimate ratio;
};

struct UbiquityReport {
  std::vector<UbiquityEntry> entries;  // (ball, n) order
  std::vector<std::vector<double>> tail_min;  // [ball][n0 - n_lo] = min_{n >= n0} ratio
  std::vector<char> flagged;  // ratios not bounded away from 0 on the tail
};

inline UbiquityReport verify_ubiquity(const Family& family, const RatePair& rates, const std::vector<ExactBox>& balls,
                                      long n_lo, long n_hi, const UbiquityOptions& opt = {}) {
  UbiquityReport rep;
  for (std::size_t b = 0; b < balls.size(); ++b) {
    std::vector<double> vals;
    for (long n = n_lo; n <= n_hi; ++n) {
      UbiquityOptions o = opt;
      o.seed = opt.seed + 1000003ULL * b + static_cast<std::uint64_t>(n);
      auto m = ubiquity_ratio(family, rates, balls[b], n, o);
      rep.entries.push_back({b, n, m});
      vals.push_back(m.value);
    }
    std::vector<double> tail(vals.size());
    double run = INFINITY;
    for (std::size_t k = vals.size(); k-- > 0;) {
      run = std::min(run, vals[k]);
      tail[k] = run;
    }
    bool flag = false;
    if (!tail.empty()) {
      std::size_t half = tail.size() / 2;
      const auto& last = rep.entries.back().ratio;
      flag = tail[half] <= 0.0 || last.value <= last.error;
    }
    rep.tail_min.push_back(std::move(tail));
    rep.flagged.push_back(flag);
  }
  return rep;
}

/// 20 reproducible dyadic balls (center k/64, radius 2^-j, j in 2..5, kept
/// inside the cube) followed by the full cube.
inline std::vector<ExactBox> default_balls(std::size_t dim, std::uint64_t seed = 7, std::size_t count = 20) {
  std::vector<ExactBox> out;
  CounterStream rng(seed, 0);
  while (out.size() < count) {
    int j = 2 + static_cast<int>(rng.next() % 4);
    std::vector<Interval<Rational>> axes;
    bool ok = true;
    for (std::size_t a = 0; a < dim; ++a) {
      int k = static_cast<int>(rng.next() % 65);
      Rational c(k, 64), r(1, 1 << j);
      if (c - r < 0 || c + r > 1) ok = false;
      axes.push_back({Rational(c - r), Rational(c + r)});
    }
    if (ok) out.emplace_back(std::move(axes));
  }
  out.push_back(ExactBox::cube(dim));
  return out;
}

struct ScalingSample {
  double r = 0, eps = 0, measure = 0, error = 0;
};

struct ScalingProbeReport {
  std::vector<ScalingSample> samples;
  double eps_slope = 0;  // d log mu / d log eps at fixed r, averaged over r
  double r_slope = 0;    // d log mu / d log r at fixed eps, averaged over eps
  double delta = 0;      // eps_slope + r_slope
  double kappa = 0;      // r_slope / delta
  bool monotone = true;
};

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

/// mu(B(x,r) n Delta(R, eps)) over the grid r_list x eps_list and log-log
/// slopes.  Points and target preimages are measured exactly, slabs by
/// Monte Carlo inside the ball.
inline ScalingProbeReport kappa_scaling_probe(const FactorSpace& factor, const FactorGeometry<Rational>& geometry,
                                              const std::vector<double>& x, const std::vector<double>& r_list,
                                              const std::vector<double>& eps_list, std::uint64_t samples,
                                              std::uint64_t seed, unsigned workers = 0) {
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::unique(v.begin(), v.end()) - v.begin();
  };
  if (distinct(r_list) < 2 || distinct(eps_list) < 2)
    throw ValidationError("kappa_scaling_probe: need at least two distinct r and two distinct eps");
  if (x.size() != static_cast<std::size_t>(factor.dim))
    throw ValidationError("kappa_scaling_probe: x dimension does not match the factor");
  for (double r : r_list)
    for (double e : eps_list)
      if (!(e < r) || !(e > 0)) throw ValidationError("kappa_scaling_probe: need 0 < eps < r for all pairs");
  AmbientSpace local({factor});
  ScalingProbeReport rep;
  for (double r : r_list)
    for (double e : eps_list) {
      CenteredRect<double> ball{x, std::vector<double>(factor.dim, r)};
      auto ball_boxes = to_boxes(ball, local);
      ScalingSample s{r, e, 0, 0};
      if (std::holds_alternative<AffineGeometry>(geometry)) {
        const auto& af = std::get<AffineGeometry>(geometry);
        Slab slab{af.q, af.p, e * static_cast<double>(l1_norm(af.q))};
        for (const auto& bb : ball_boxes) {
          auto m = mc_fraction([&](const std::vector<double>& y) { return slab.contains(y); }, local, bb, samples,
                               seed, workers);
          double vol = box_measure(bb, local).value;
          s.measure += m.value * vol;
          s.error += m.error * vol;
        }
      } else {
        auto nb = neighborhood(geometry, Rational(e), factor);
        std::vector<Box> pieces;
        for (const auto& b : nb.boxes)
          for (const auto& bb : ball_boxes)
            if (auto c = b.convert<double>().intersect(bb)) pieces.push_back(*c);
        auto m = exact_union_measure(pieces, local);
        s.measure = m.value;
        s.error = m.error;
      }
      rep.samples.push_back(s);
    }
  const std::size_t R = r_list.size(), E = eps_list.size();
  auto at = [&](std::size_t i, std::size_t j) { return rep.samples[i * E + j].measure; };
  std::vector<double> le, lr;
  for (double e : eps_list) le.push_back(std::log(e));
  for (double r : r_list) lr.push_back(std::log(r));
  double es = 0, rs = 0;
  for (std::size_t i = 0; i < R; ++i) {
    std::vector<double> y;
    for (std::size_t j = 0; j < E; ++j) y.push_back(std::log(at(i, j)));
    es += detail::ls_slope(le, y);
  }
  for (std::size_t j = 0; j < E; ++j) {
    std::vector<double> y;
    for (std::size_t i = 0; i < R; ++i) y.push_back(std::log(at(i, j)));
    rs += detail::ls_slope(lr, y);
  }
  rep.eps_slope = es / R;
  rep.r_slope = rs / E;
  rep.delta = rep.eps_slope + rep.r_slope;
  rep.kappa = rep.delta != 0 ? rep.r_slope / rep.delta : 0;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < E; ++j) {
      for (std::size_t i2 = 0; i2 < R; ++i2)
        if (r_list[i2] > r_list[i] && at(i2, j) + 1e-15 < at(i, j) - rep.samples[i * E + j].error -
                                                              rep.samples[i2 * E + j].error)
          rep.monotone = false;
      for (std::size_t j2 = 0; j2 < E; ++j2)
        if (eps_list[j2] > eps_list[j] && at(i, j2) + 1e-15 < at(i, j) - rep.samples[i * E + j].error -
                                                                 rep.samples[i * E + j2].error)
          rep.monotone = false;
    }
  return rep;
}

}  // namespace limsup
