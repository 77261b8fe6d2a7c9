#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "cantor.hpp"
#include "geometry.hpp"

namespace limsup {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 stream keyed by (seed, index): sample i sees the same numbers
/// whichever worker draws it.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t index)
      : state_(mix64(seed ^ mix64(index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

namespace detail {

inline int cantor_digits_for_double(int base) {
  return static_cast<int>(std::ceil(53.0 * std::log(2.0) / std::log(static_cast<double>(base))));
}

/// Cantor-distributed point in the cylinder [left, left + width].
inline double cantor_sample(CounterStream& rng, const CantorSpec& spec, double left, double width) {
  int levels = detail::cantor_digits_for_double(spec.base);
  double x = left, w = width;
  for (int k = 0; k < levels; ++k) {
    w /= spec.base;
    x += spec.digits[rng.next() % spec.digits.size()] * w;
  }
  return x;
}

}  // namespace detail

/// Draws points from mu conditioned on a region box (rejection on Cantor axes).
class Sampler {
 public:
  Sampler(const AmbientSpace& space, std::optional<Box> region = std::nullopt)
      : space_(space), region_(region ? *region : Box::cube(space.total_dim())) {
    if (region_.dim() != space.total_dim())
      throw ValidationError("sampler: region dimension does not match the space");
    for (std::size_t a = 0; a < space.total_dim(); ++a) {
      if (const CantorSpec* cs = space.axis_cantor(a)) {
        auto [l, w] = enclosing_cylinder(region_[a].lo, region_[a].hi, cs->base, 40);
        cyl_.push_back({l, w});
      } else {
        cyl_.push_back({0.0, 0.0});
      }
    }
  }

  void draw(CounterStream& rng, std::vector<double>& x) const {
    const std::size_t D = space_.total_dim();
    x.resize(D);
    for (std::size_t a = 0; a < D; ++a) {
      const auto& iv = region_[a];
      if (const CantorSpec* cs = space_.axis_cantor(a)) {
        for (int tries = 0;; ++tries) {
          double v = detail::cantor_sample(rng, *cs, cyl_[a].first, cyl_[a].second);
          if (v >= iv.lo && v <= iv.hi) {
            x[a] = v;
            break;
          }
          if (tries > 100000)
            throw ValidationError("sampler: region has (numerically) zero Cantor measure");
        }
      } else {
        x[a] = iv.lo + (iv.hi - iv.lo) * rng.uniform();
      }
    }
  }

  const Box& region() const { return region_; }

 private:
  const AmbientSpace& space_;
  Box region_;
  std::vector<std::pair<double, double>> cyl_;
};

inline unsigned default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Fraction of mu-samples inside `region` (whole space by default) that
/// satisfy the predicate.  error = 4 sqrt(p(1-p)/n).
template <class Pred>
MeasureEstimate mc_fraction(const Pred& membership, const AmbientSpace& space,
                            std::optional<Box> region, std::uint64_t samples, std::uint64_t seed,
                            unsigned workers = 0) {
  if (samples < 1) throw ValidationError("mc_measure: samples must be >= 1");
  Sampler sampler(space, region);
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, samples));
  std::vector<std::uint64_t> hits(workers, 0);
  auto run = [&](unsigned w) {
    std::vector<double> x;
    std::uint64_t lo = samples * w / workers, hi = samples * (w + 1) / workers;
    std::uint64_t h = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      CounterStream rng(seed, i);
      sampler.draw(rng, x);
      if (membership(x)) ++h;
    }
    hits[w] = h;
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  MeasureEstimate m;
  m.value = static_cast<double>(total) / static_cast<double>(samples);
  m.error = 4.0 * std::sqrt(m.value * (1.0 - m.value) / static_cast<double>(samples));
  m.method = Method::MonteCarlo;
  m.seed = seed;
  m.samples = samples;
  return m;
}

template <class Pred>
MeasureEstimate mc_measure(const Pred& membership, const AmbientSpace& space, std::uint64_t samples,
                           std::uint64_t seed, unsigned workers = 0) {
  return mc_fraction(membership, space, std::nullopt, samples, seed, workers);
}

/// Predicate for a union of boxes (closed boxes; boundaries are null sets).
template <class T>
auto box_union_predicate(const std::vector<BasicBox<T>>& boxes) {
  std::vector<Box> fb;
  for (const auto& b : boxes) fb.push_back(b.template convert<double>());
  return [fb = std::move(fb)](const std::vector<double>& x) {
    for (const auto& b : fb)
      if (b.contains(x)) return true;
    return false;
  };
}

}  // namespace limsup
