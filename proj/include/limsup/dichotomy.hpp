#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "covering.hpp"
#include "membership.hpp"
#include "monte_carlo.hpp"
#include "rates.hpp"
#include "sweep.hpp"
#include "systems.hpp"

namespace limsup {

struct SeriesPoint {
  long N = 0;
  double partial_sum = 0;
  double last_term = 0;
};

enum class SeriesClass { Diverging, Converging, Inconclusive };

inline const char* series_class_name(SeriesClass c) {
  switch (c) {
    case SeriesClass::Diverging: return "diverging";
    case SeriesClass::Converging: return "converging";
    case SeriesClass::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct SeriesReport {
  std::string label;
  std::vector<SeriesPoint> points;
  SeriesClass classification = SeriesClass::Inconclusive;
  double growth_log10 = 0;  // log10 of (S_N - S_{N/2}) / ln 2; heuristic
  // M-adic block comparison (linear forms only)
  bool has_block = false;
  double block_sum = 0;
  double block_bound = 0;
  double c2 = 0;

  double final_sum() const { return points.empty() ? 0.0 : points.back().partial_sum; }
};

/// Compensated running sum.
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0, comp_ = 0;
};

namespace detail {

inline std::vector<long> checkpoints(long N) {
  std::vector<long> out;
  for (long p = 1; p <= N; p *= 10)
    for (long m : {1L, 2L, 5L})
      if (m * p <= N) out.push_back(m * p);
  out.push_back(N);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Sums term(1..N) and classifies by the gain over the last doubling.
template <class Term>
SeriesReport run_series(long N, Term&& term, std::string label) {
  if (N < 1) throw ValidationError("series: N must be >= 1");
  SeriesReport rep;
  rep.label = std::move(label);
  auto cps = checkpoints(N);
  std::size_t next = 0;
  NeumaierSum s;
  double half_sum = 0;
  for (long n = 1; n <= N; ++n) {
    double t = term(n);
    s.add(t);
    if (n == N / 2) half_sum = s.value();
    if (next < cps.size() && cps[next] == n) {
      rep.points.push_back({n, s.value(), t});
      ++next;
    }
  }
  if (N >= 4) {
    double g = (s.value() - half_sum) / std::log(static_cast<double>(N) / static_cast<double>(N / 2));
    rep.growth_log10 = g > 0 ? std::log10(g) : -std::numeric_limits<double>::infinity();
    if (rep.growth_log10 > -0.9) rep.classification = SeriesClass::Diverging;
    else if (rep.growth_log10 < -1.1) rep.classification = SeriesClass::Converging;
  }
  return rep;
}

}  // namespace detail

/// sum_n prod_i (psi_i(u_n)/rho_i(u_n))^(delta_i (1 - kappa_i)).
inline SeriesReport theorem_series(const RatePair& rates, const std::vector<double>& deltas,
                                   const std::vector<double>& kappas, long N) {
  if (deltas.size() != rates.psi.size() || kappas.size() != rates.psi.size())
    throw ValidationError("theorem_series: need delta and kappa per factor");
  return detail::run_series(
      N,
      [&](long n) {
        double lu = rates.levels.log_upper(n);
        double l = 0;
        for (std::size_t i = 0; i < rates.psi.size(); ++i)
          l += deltas[i] * (1 - kappas[i]) * (rates.psi[i].log_at(lu) - rates.rho[i].log_at(lu));
        return std::exp(l);
      },
      "theorem");
}

inline SeriesReport theorem_series(const RatePair& rates, const AmbientSpace& space, long N) {
  std::vector<double> dl, kp;
  for (const auto& f : space.factors()) {
    dl.push_back(f.delta);
    kp.push_back(f.kappa);
  }
  return theorem_series(rates, dl, kp, N);
}

/// Application series: sum prod phi_i(q) (simultaneous), sum q^-1 prod phi_i
/// prod Phi_k (linear forms, with the M-adic block bound), sum prod
/// psi_i(n)^delta_i (shrinking targets).
inline SeriesReport application_series(SystemKind kind, const std::vector<RateFunction>& phi,
                                       const std::vector<RateFunction>& Phi, long Q, long M = 2,
                                       const std::vector<double>& deltas = {}) {
  auto lg = [](long q) { return std::log(static_cast<double>(q)); };
  if (kind == SystemKind::Rational)
    return detail::run_series(
        Q,
        [&](long q) {
          double l = 0;
          for (const auto& f : phi) l += f.log_at(lg(q));
          return std::exp(l);
        },
        "sum prod phi_i(q)");
  if (kind == SystemKind::Shrinking) {
    std::vector<double> dl = deltas.empty() ? std::vector<double>(phi.size(), 1.0) : deltas;
    return detail::run_series(
        Q,
        [&](long n) {
          double l = 0;
          for (std::size_t i = 0; i < phi.size(); ++i) l += dl[i] * phi[i].log_at(lg(n));
          return std::exp(l);
        },
        "sum prod psi_i(n)^delta_i");
  }
  auto logterm = [&](double lu) {
    double l = 0;
    for (const auto& f : phi) l += f.log_at(lu);
    for (const auto& P : Phi) l += P.log_at(lu);
    return l;
  };
  SeriesReport rep = detail::run_series(
      Q, [&](long q) { return std::exp(logterm(lg(q)) - lg(q)); }, "sum q^-1 prod phi_i prod Phi_k");
  rep.has_block = true;
  NeumaierSum b;
  double c2 = 1.0;
  const double lM = std::log(static_cast<double>(M));
  for (long t = 0; std::exp(t * lM) <= static_cast<double>(Q) * (1 + 1e-12); ++t) {
    b.add(std::exp(logterm(t * lM)));
    for (const auto& P : Phi) c2 = std::max(c2, std::exp(P.log_at((t + 1) * lM) - P.log_at(t * lM)));
  }
  rep.block_sum = b.value();
  rep.c2 = c2;
  rep.block_bound = static_cast<double>(M - 1) * std::pow(c2, static_cast<double>(Phi.size())) * rep.block_sum;
  return rep;
}

struct LevelSet {
  long level = 0;
  CenteredRect<Rational> ball;
  std::vector<CenteredRect<Rational>> big;                  // A_n, radius rho
  std::vector<std::vector<std::int64_t>> chosen;            // alpha per kept center
  std::vector<std::vector<CenteredRect<Rational>>> shrunk;  // C(x), radius psi
  std::vector<ExactBox> boxes;                              // E_n, clipped to the ball
};

struct LevelSetOptions {
  std::uint64_t cap = 200'000;
  std::size_t max_grid = 4096;  // hyperplane grid points per factor
};

namespace detail {

// Distance from z to [lo, hi] (circle-aware).
inline Rational dist_to_interval(const Rational& z, const Rational& lo, const Rational& hi, bool torus) {
  if (!(z < lo) && !(hi < z)) return Rational(0);
  if (torus) return min_of(circle_distance(z, lo), circle_distance(z, hi));
  return z < lo ? Rational(lo - z) : Rational(z - hi);
}

// Points of {A : A.q = p} n [0,1]^h on a grid of the given spacing whose
// coordinates are within `reach` of `near` (or anywhere if near is empty).
inline std::vector<std::vector<Rational>> hyperplane_grid(const AffineGeometry& g, const Rational& spacing,
                                                          const std::vector<Rational>& near, const Rational& reach,
                                                          std::size_t max_points) {
  const std::size_t h = g.q.size();
  std::size_t star = 0;
  for (std::size_t k = 0; k < h; ++k)
    if (abs_of(g.q[k]) > abs_of(g.q[star])) star = k;
  std::vector<std::vector<Rational>> axis(h);
  for (std::size_t k = 0; k < h; ++k) {
    if (k == star) continue;
    Rational lo(0), hi(1);
    if (!near.empty()) {
      lo = max_of(lo, Rational(near[k] - reach));
      hi = min_of(hi, Rational(near[k] + reach));
    }
    // grid anchored at `near` (or 0) so the kept center itself is a node
    Rational anchor = near.empty() ? Rational(0) : near[k];
    BigInt j0 = floor_of(Rational((lo - anchor) / spacing));
    for (BigInt j = j0;; ++j) {
      Rational v = anchor + Rational(j) * spacing;
      if (hi < v) break;
      if (v < lo) continue;
      if (!near.empty() && !(abs_of(Rational(v - near[k])) < reach)) continue;
      axis[k].push_back(v);
      if (axis[k].size() > max_points) throw SizeError("hyperplane grid too fine", axis[k].size());
    }
  }
  std::vector<std::vector<Rational>> out;
  std::vector<std::size_t> idx(h, 0);
  for (std::size_t k = 0; k < h; ++k)
    if (k != star && axis[k].empty()) return out;
  while (true) {
    std::vector<Rational> z(h);
    Rational rest(g.p);
    for (std::size_t k = 0; k < h; ++k)
      if (k != star) {
        z[k] = axis[k][idx[k]];
        rest -= Rational(g.q[k]) * z[k];
      }
    z[star] = Rational(rest / Rational(g.q[star]));
    bool ok = !(z[star] < 0) && !(z[star] > 1);
    if (ok && !near.empty()) ok = abs_of(Rational(z[star] - near[star])) < reach;
    if (ok) out.push_back(std::move(z));
    if (out.size() > max_points) throw SizeError("hyperplane grid too fine", out.size());
    std::size_t k = 0;
    for (; k < h; ++k) {
      if (k == star) continue;
      if (++idx[k] < axis[k].size()) break;
      idx[k] = 0;
    }
    if (k == h) break;
  }
  return out;
}

// Per-factor resonant points of an item (near = empty: all).
inline std::vector<std::vector<Rational>> factor_points(const FactorGeometry<Rational>& g, const Rational& spacing,
                                                        const std::vector<Rational>& near, const Rational& reach,
                                                        std::size_t max_points) {
  if (auto p = std::get_if<PointGeometry<Rational>>(&g)) return {p->coords};
  if (auto c = std::get_if<CantorPreimageGeometry<Rational>>(&g)) return {{c->center}};
  return hyperplane_grid(std::get<AffineGeometry>(g), spacing, near, reach, max_points);
}

inline bool on_resonant_set(const ResonantItem& it, const std::vector<Rational>& x, const AmbientSpace& space) {
  std::size_t off = 0;
  for (std::size_t i = 0; i < it.geometry.size(); ++i) {
    const auto& g = it.geometry[i];
    const int dim = space.factors()[i].dim;
    if (auto p = std::get_if<PointGeometry<Rational>>(&g)) {
      for (int k = 0; k < dim; ++k) {
        Rational a = p->coords[k], b = x[off + k];
        if (space.factors()[i].torus ? circle_distance(a, b) != 0 : a != b) return false;
      }
    } else if (auto c = std::get_if<CantorPreimageGeometry<Rational>>(&g)) {
      if (circle_distance(c->center, x[off]) != 0) return false;
    } else {
      const auto& af = std::get<AffineGeometry>(g);
      Rational v(-af.p);
      for (int k = 0; k < dim; ++k) v += Rational(af.q[k]) * x[off + k];
      if (v != 0) return false;
    }
    off += dim;
  }
  return true;
}

template <class F>
void for_each_product(const std::vector<std::vector<std::vector<Rational>>>& per, F&& f) {
  for (const auto& v : per)
    if (v.empty()) return;
  std::vector<std::size_t> idx(per.size(), 0);
  while (true) {
    std::vector<Rational> z;
    for (std::size_t i = 0; i < per.size(); ++i) z.insert(z.end(), per[i][idx[i]].begin(), per[i][idx[i]].end());
    f(z);
    std::size_t i = 0;
    for (; i < per.size(); ++i) {
      if (++idx[i] < per[i].size()) break;
      idx[i] = 0;
    }
    if (i == per.size()) break;
  }
}

}  // namespace detail

/// Steps 1-2 of the divergence proof: big rho-rectangles centred on
/// resonant points near (1/2)B, a 5r subfamily A_n, and per kept center the
/// psi-rectangles on the chosen resonant set, again thinned by 5r.
inline LevelSet build_level_set(const Family& family, const RatePair& rates, const ExactBox& ball, long n,
                                const LevelSetOptions& opt = {}) {
  AmbientSpace space = ambient_space(family);
  const std::size_t D = space.total_dim();
  if (ball.dim() != D) throw ValidationError("build_level_set: ball dimension does not match");
  const std::size_t F = family_factors(family);
  std::vector<Rational> rho(F), psi(F);
  for (std::size_t i = 0; i < F; ++i) {
    rho[i] = rates.rho_exact(i, n);
    psi[i] = rates.psi_exact(i, n);
    if (rho[i] < psi[i]) throw RateError("build_level_set: psi > rho at level " + std::to_string(n), n);
  }
  std::vector<Rational> rho_ax(D), psi_ax(D);
  for (std::size_t a = 0; a < D; ++a) {
    rho_ax[a] = rho[space.axis_factor(a)];
    psi_ax[a] = psi[space.axis_factor(a)];
  }

  LevelSet ls;
  ls.level = n;
  for (std::size_t a = 0; a < D; ++a) {
    ls.ball.center.push_back(Rational((ball[a].lo + ball[a].hi) / 2));
    ls.ball.half.push_back(Rational((ball[a].hi - ball[a].lo) / 2));
  }

  auto items = enumerate_level(family, rates.levels, n, opt.cap);
  // candidate centers near (1/2)B, first generating item
  std::map<std::vector<Rational>, std::size_t> first;
  for (std::size_t j = 0; j < items.size(); ++j) {
    std::vector<std::vector<std::vector<Rational>>> per(F);
    for (std::size_t i = 0; i < F; ++i)
      per[i] = detail::factor_points(items[j].geometry[i], Rational(rho[i] / 2), {}, Rational(0), opt.max_grid);
    detail::for_each_product(per, [&](const std::vector<Rational>& z) {
      for (std::size_t a = 0; a < D; ++a) {
        Rational hh = Rational(ls.ball.half[a] / 2);
        auto dd = detail::dist_to_interval(z[a], Rational(ls.ball.center[a] - hh), Rational(ls.ball.center[a] + hh),
                                           space.axis_torus(a));
        if (!(dd < rho_ax[a])) return;
      }
      first.emplace(z, j);
    });
  }
  std::vector<CenteredRect<Rational>> cands;
  std::vector<std::size_t> gen;
  for (const auto& [z, j] : first) {
    cands.push_back({z, rho_ax});
    gen.push_back(j);
  }
  auto kept = five_r_cover_indices(cands, space, Rational(5));
  std::vector<ExactBox> ball_boxes{ball};
  for (std::size_t k : kept) {
    const auto& x = cands[k].center;
    std::size_t alpha = gen[k];
    for (std::size_t j = 0; j < gen[k]; ++j)
      if (detail::on_resonant_set(items[j], x, space)) {
        alpha = j;
        break;
      }
    const ResonantItem& it = items[alpha];
    ls.big.push_back(cands[k]);
    ls.chosen.push_back(it.index);
    // psi-rectangles on R_alpha inside the big rectangle
    std::vector<std::vector<std::vector<Rational>>> per(F);
    std::size_t off = 0;
    for (std::size_t i = 0; i < F; ++i) {
      const int dim = space.factors()[i].dim;
      std::vector<Rational> xi(x.begin() + off, x.begin() + off + dim);
      per[i] = detail::factor_points(it.geometry[i], Rational(psi[i] / 2), xi, rho[i], opt.max_grid);
      off += dim;
    }
    std::vector<CenteredRect<Rational>> small;
    detail::for_each_product(per, [&](const std::vector<Rational>& z) { small.push_back({z, psi_ax}); });
    auto c = five_r_cover(small, space, Rational(5));
    for (const auto& r : c)
      for (const auto& b : to_boxes(r, space))
        if (auto cl = b.intersect(ball)) ls.boxes.push_back(std::move(*cl));
    ls.shrunk.push_back(std::move(c));
  }
  return ls;
}

/// Structural invariants of a level set; empty when all hold.
inline std::vector<std::string> check_level_set(const LevelSet& ls, const AmbientSpace& space) {
  std::vector<std::string> bad;
  const Rational five(5);
  for (std::size_t i = 0; i < ls.big.size(); ++i)
    for (std::size_t j = i + 1; j < ls.big.size(); ++j)
      if (!enlargements_disjoint(ls.big[i], ls.big[j], space, five))
        bad.push_back("big rectangles " + std::to_string(i) + "," + std::to_string(j) + " not 5x-disjoint");
  for (std::size_t g = 0; g < ls.shrunk.size(); ++g) {
    const auto& C = ls.shrunk[g];
    for (std::size_t i = 0; i < C.size(); ++i) {
      for (std::size_t j = i + 1; j < C.size(); ++j)
        if (!enlargements_disjoint(C[i], C[j], space, five)) bad.push_back("shrunk rectangles not 5x-disjoint");
      for (std::size_t a = 0; a < C[i].center.size(); ++a) {
        Rational dd = space.axis_torus(a) ? circle_distance(C[i].center[a], ls.big[g].center[a])
                                          : abs_of(Rational(C[i].center[a] - ls.big[g].center[a]));
        if (Rational(5 * ls.big[g].half[a]) < Rational(dd + C[i].half[a]))
          bad.push_back("shrunk rectangle outside the 5x big rectangle");
      }
    }
  }
  for (const auto& b : ls.boxes)
    for (std::size_t a = 0; a < b.dim(); ++a)
      if (b[a].lo < Rational(ls.ball.center[a] - ls.ball.half[a]) ||
          Rational(ls.ball.center[a] + ls.ball.half[a]) < b[a].hi)
        bad.push_back("E_n box outside the ball");
  return bad;
}

struct ChungErdosReport {
  std::vector<Rational> measures;             // mu(E_n)
  std::vector<std::vector<double>> pairwise;  // mu(E_m n E_n), diagonal = mu(E_n)
  std::vector<double> ratios;                 // prefix N = 2..L; +inf if the denominator vanishes
  std::vector<Rational> sum_measure;          // prefix sums of mu(E_n)
  std::vector<Rational> pair_sum;             // sum over ordered pairs m != n
  std::optional<Rational> exact_ratio;        // at N = L, if the denominator is positive
  std::string note;
};

inline ChungErdosReport chung_erdos_bound(const std::vector<LevelSet>& sets, const AmbientSpace& space,
                                          const SweepOptions& opt = {}) {
  if (sets.size() < 2) throw ValidationError("chung_erdos_bound: need at least two level sets");
  const std::size_t L = sets.size();
  ChungErdosReport rep;
  std::vector<std::vector<Rational>> P(L, std::vector<Rational>(L));
  for (std::size_t i = 0; i < L; ++i) {
    P[i][i] = exact_union_measure(sets[i].boxes, space, opt).value;
    rep.measures.push_back(P[i][i]);
  }
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i + 1; j < L; ++j) {
      P[i][j] = exact_union_measure(intersect_unions(sets[i].boxes, sets[j].boxes), space, opt).value;
      P[j][i] = P[i][j];
    }
  rep.pairwise.assign(L, std::vector<double>(L));
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) rep.pairwise[i][j] = to_double(P[i][j]);
  Rational s(0), pairs(0);
  for (std::size_t N = 1; N <= L; ++N) {
    s += P[N - 1][N - 1];
    for (std::size_t m = 0; m + 1 < N; ++m) pairs += Rational(2 * P[m][N - 1]);
    rep.sum_measure.push_back(s);
    rep.pair_sum.push_back(pairs);
    if (N >= 2) {
      if (pairs == 0) rep.ratios.push_back(std::numeric_limits<double>::infinity());
      else rep.ratios.push_back(to_double(Rational(s * s / pairs)));
    }
  }
  if (pairs != 0) rep.exact_ratio = Rational(s * s / pairs);
  else
    rep.note = "disjoint level sets: denominator 0, lower bound min(1, sum mu(E_n)) = " +
               std::to_string(std::min(1.0, to_double(s)));
  return rep;
}

struct HitHistogram {
  long n_lo = 0, n_hi = 0;
  std::vector<std::vector<char>> hits;  // [point][n - n_lo]

  /// Fraction of points hit in at least k levels of [a, b].
  double window_fraction(long a, long b, int k = 1) const {
    if (a < n_lo || b > n_hi || b < a) throw ValidationError("window outside the recorded levels");
    if (hits.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& h : hits) {
      int cnt = 0;
      for (long n = a; n <= b; ++n) cnt += h[n - n_lo];
      if (cnt >= k) ++c;
    }
    return static_cast<double>(c) / static_cast<double>(hits.size());
  }
};

/// `count` points drawn from mu with the counter-based streams.
inline std::vector<std::vector<double>> sample_points(const AmbientSpace& space, std::size_t count,
                                                      std::uint64_t seed) {
  Sampler s(space);
  std::vector<std::vector<double>> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterStream rng(seed, i);
    s.draw(rng, out[i]);
  }
  return out;
}

inline HitHistogram hit_statistics(const Family& family, const RatePair& rates,
                                   const std::vector<std::vector<double>>& points, long n_lo, long n_hi,
                                   unsigned workers = 0) {
  if (n_hi < n_lo) throw ValidationError("hit_statistics: empty level range");
  HitHistogram h;
  h.n_lo = n_lo;
  h.n_hi = n_hi;
  std::vector<LevelMembership> members;
  for (long n = n_lo; n <= n_hi; ++n) {
    std::vector<double> r;
    for (std::size_t i = 0; i < rates.psi.size(); ++i) r.push_back(rates.psi_at(i, n));
    members.emplace_back(family, rates.levels, n, std::move(r));
  }
  h.hits.assign(points.size(), std::vector<char>(n_hi - n_lo + 1, 0));
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, points.size())));
  auto run = [&](unsigned w) {
    for (std::size_t p = points.size() * w / workers; p < points.size() * (w + 1) / workers; ++p)
      for (std::size_t k = 0; k < members.size(); ++k) h.hits[p][k] = members[k](points[p]) ? 1 : 0;
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  return h;
}

}  // namespace limsup
