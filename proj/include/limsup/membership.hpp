#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "farey.hpp"
#include "systems.hpp"

namespace limsup {

/// Point test for U_{alpha in J_n} prod Delta(R_{alpha,i}, r_i).
class LevelMembership {
 public:
  LevelMembership(const Family& family, const LevelScheme& scheme, long n, std::vector<double> radii)
      : family_(family), radii_(std::move(radii)) {
    auto [l, u] = level_bounds(family, scheme, n);
    lo_ = l;
    hi_ = u;
    n_ = n;
    if (auto lf = std::get_if<LinearFormsFamily>(&family)) {
      QWindow w = linear_window(*lf, n);
      for (int k = 0; k < lf->h; ++k) qvals_.push_back(window_values(w.lo[k], w.hi[k]));
    }
    if (auto sf = std::get_if<ShrinkingFamily>(&family)) {
      for (std::size_t i = 0; i < sf->factors.size(); ++i) {
        double bn = std::pow(static_cast<double>(sf->factors[i].base), static_cast<double>(n));
        if (bn > 9.0e15) throw SizeError("shrinking membership: b^n too large", static_cast<std::uint64_t>(n));
        bpow_.push_back(bn);
        xo_.push_back(to_double(sf->target[i]));
      }
    }
    if (radii_.size() != family_factors(family))
      throw ValidationError("membership: need one radius per factor");
  }

  bool operator()(const std::vector<double>& x) const {
    switch (family_kind(family_)) {
      case SystemKind::Rational: return rational(x);
      case SystemKind::LinearForms: return linear(x);
      case SystemKind::Shrinking: return shrinking(x);
    }
    return false;
  }

 private:
  static double frac_dist(double v) { return std::abs(v - std::nearbyint(v)); }

  bool rational(const std::vector<double>& x) const {
    const std::size_t d = radii_.size();
    const std::int64_t span = hi_ - lo_;
    if (d == 1) {
      const double r = radii_[0];
      const double u = static_cast<double>(hi_);
      if (span > 64 && 2.0 * r * u * u < static_cast<double>(span) / 4.0) return rational_farey(x[0], r);
    }
    for (std::int64_t q = lo_; q <= hi_; ++q) {
      bool all = true;
      for (std::size_t i = 0; i < d && all; ++i)
        all = frac_dist(q * x[i]) < q * radii_[i];
      if (all) return true;
    }
    return false;
  }

  // Reduced a/b near x with some multiple of b in [lo, hi].
  bool rational_farey(double x, double r) const {
    bool hit = false;
    auto test = [&](std::int64_t a, std::int64_t b) {
      double v = static_cast<double>(a) / static_cast<double>(b);
      double dd = std::abs(v - x);
      dd = std::min(dd, 1.0 - dd);
      if (dd < r && (hi_ / b) * b >= lo_) hit = true;
      return hit;
    };
    double a = x - r, b = x + r;
    for_each_farey_in(std::max(a, 0.0), std::min(b, 1.0), hi_, test);
    if (!hit && a < 0) for_each_farey_in(1.0 + a, 1.0, hi_, test);
    if (!hit && b > 1) for_each_farey_in(0.0, b - 1.0, hi_, test);
    return hit;
  }

  bool linear(const std::vector<double>& x) const {
    const auto& lf = std::get<LinearFormsFamily>(family_);
    const int h = lf.h, d = lf.d;
    std::vector<std::size_t> qi(h, 0);
    std::vector<std::int64_t> q(h);
    while (true) {
      std::int64_t mx = 0, l1 = 0;
      for (int k = 0; k < h; ++k) {
        q[k] = qvals_[k][qi[k]];
        std::int64_t a = q[k] < 0 ? -q[k] : q[k];
        mx = std::max(mx, a);
        l1 += a;
      }
      if (mx > 0) {
        bool all = true;
        for (int i = 0; i < d && all; ++i) {
          double v = 0.0;
          for (int k = 0; k < h; ++k) v += x[i * h + k] * static_cast<double>(q[k]);
          double p = std::nearbyint(v);
          double P = static_cast<double>(h * mx);
          p = std::clamp(p, -P, P);
          all = std::abs(v - p) < radii_[i] * static_cast<double>(l1);
        }
        if (all) return true;
      }
      int k = h - 1;
      for (; k >= 0; --k) {
        if (++qi[k] < qvals_[k].size()) break;
        qi[k] = 0;
      }
      if (k < 0) return false;
    }
  }

  bool shrinking(const std::vector<double>& x) const {
    const auto& sf = std::get<ShrinkingFamily>(family_);
    for (std::size_t i = 0; i < sf.factors.size(); ++i) {
      const auto& spec = sf.factors[i];
      const double bn = bpow_[i];
      const double r = radii_[i];
      // centers (m + x_o)/b^n; m's n base-b digits must lie in Lambda
      double y = x[i] * bn - xo_[i];
      double m0 = std::floor(y - r * bn) - 1, m1 = std::ceil(y + r * bn) + 1;
      bool any = false;
      for (double m = m0; m <= m1 && !any; m += 1.0) {
        double mm = std::fmod(m, bn);
        if (mm < 0) mm += bn;
        double c = (mm + xo_[i]) / bn;
        double dd = std::abs(c - x[i]);
        dd = std::min(dd, 1.0 - dd);
        if (!(dd < r)) continue;
        auto v = static_cast<std::uint64_t>(mm);
        bool ok = true;
        for (long j = 0; j < n_ && ok; ++j) {
          ok = spec.has_digit(static_cast<int>(v % spec.base));
          v /= spec.base;
        }
        any = ok;
      }
      if (!any) return false;
    }
    return true;
  }

  Family family_;
  std::vector<double> radii_;
  std::int64_t lo_ = 0, hi_ = 0;
  long n_ = 0;
  std::vector<std::vector<std::int64_t>> qvals_;
  std::vector<double> bpow_, xo_;
};

}  // namespace limsup
