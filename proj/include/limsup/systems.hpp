#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "neighborhood.hpp"
#include "rate_function.hpp"

namespace limsup {

enum class SystemKind { Rational, LinearForms, Shrinking };

inline const char* kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::Rational: return "rational";
    case SystemKind::LinearForms: return "linear-forms";
    case SystemKind::Shrinking: return "shrinking";
  }
  return "?";
}

/// Rational points p/q in [0,1]^d.
struct RationalFamily {
  int d = 1;
};

/// Hyperplanes {A_i : A_i.q = p_i} in d factors [0,1]^h; q windowed by Phi.
struct LinearFormsFamily {
  int d = 1;
  int h = 1;
  std::vector<RateFunction> Phi;  // one per k < h
  long M = 2;
};

/// Target preimages x(w) = sum eps_j b^-j + x_o b^-n of length-n words.
struct ShrinkingFamily {
  std::vector<CantorSpec> factors;
  std::vector<Rational> target;  // x_o per factor
};

using Family = std::variant<RationalFamily, LinearFormsFamily, ShrinkingFamily>;

inline SystemKind family_kind(const Family& f) {
  if (std::holds_alternative<RationalFamily>(f)) return SystemKind::Rational;
  if (std::holds_alternative<LinearFormsFamily>(f)) return SystemKind::LinearForms;
  return SystemKind::Shrinking;
}

inline std::size_t family_factors(const Family& f) {
  if (auto r = std::get_if<RationalFamily>(&f)) return r->d;
  if (auto l = std::get_if<LinearFormsFamily>(&f)) return l->d;
  return std::get<ShrinkingFamily>(f).factors.size();
}

inline void validate_family(const Family& f) {
  std::vector<std::string> bad;
  if (auto r = std::get_if<RationalFamily>(&f)) {
    if (r->d < 1) bad.push_back("system.d must be >= 1");
  } else if (auto l = std::get_if<LinearFormsFamily>(&f)) {
    if (l->d < 1) bad.push_back("system.d must be >= 1");
    if (l->h < 1) bad.push_back("system.h must be >= 1");
    if (static_cast<int>(l->Phi.size()) != l->h) bad.push_back("system.Phi: need one function per k <= h");
    if (l->M < 2) bad.push_back("system.M must be >= 2");
  } else {
    const auto& s = std::get<ShrinkingFamily>(f);
    if (s.factors.empty()) bad.push_back("system.base: need at least one factor");
    if (s.target.size() != s.factors.size()) bad.push_back("system.target: need one x_o per factor");
    for (const auto& c : s.factors) {
      try {
        c.validate();
      } catch (const ValidationError& e) {
        for (const auto& m : e.fields()) bad.push_back("system." + m);
      }
    }
    for (const auto& x : s.target)
      if (x < 0 || x > 1) bad.push_back("system.target: x_o must lie in [0,1]");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

/// Ambient space of the family: torus circles for points and targets, the
/// closed cube [0,1]^h (kappa = (h-1)/h) per linear-forms factor.
inline AmbientSpace ambient_space(const Family& f) {
  std::vector<FactorSpace> fs;
  if (auto r = std::get_if<RationalFamily>(&f)) {
    for (int i = 0; i < r->d; ++i) fs.push_back(FactorSpace::lebesgue(1));
  } else if (auto l = std::get_if<LinearFormsFamily>(&f)) {
    for (int i = 0; i < l->d; ++i)
      fs.push_back(FactorSpace::lebesgue(l->h, static_cast<double>(l->h - 1) / l->h, false));
  } else {
    for (const auto& c : std::get<ShrinkingFamily>(f).factors) fs.push_back(FactorSpace::cantor_factor(c));
  }
  return AmbientSpace(std::move(fs));
}

/// Per-factor Ahlfors exponents (the Cantor exponent also for full digit sets).
inline std::vector<double> factor_deltas(const Family& f) {
  std::vector<double> out;
  if (auto s = std::get_if<ShrinkingFamily>(&f)) {
    for (const auto& c : s->factors) out.push_back(c.delta());
  } else {
    for (const auto& x : ambient_space(f).factors()) out.push_back(x.delta);
  }
  return out;
}

struct LevelScheme {
  enum class Kind { Geometric, Identity, Window, Fixed };
  Kind kind = Kind::Geometric;
  long M = 2;
  std::int64_t fixed_lo = 0, fixed_hi = 0;  // Fixed: [l, u] for every n

  static LevelScheme geometric(long M) { return {Kind::Geometric, M}; }
  static LevelScheme identity() { return {Kind::Identity, 1}; }
  static LevelScheme window(long M) { return {Kind::Window, M}; }
  static LevelScheme fixed(std::int64_t l, std::int64_t u) { return {Kind::Fixed, 1, l, u}; }

  /// log u_n
  double log_upper(long n) const {
    if (kind == Kind::Fixed) return std::log(static_cast<double>(fixed_hi));
    if (kind == Kind::Identity) return std::log(static_cast<double>(n));
    return static_cast<double>(n) * std::log(static_cast<double>(M));
  }

  /// u_n as an integer (throws when it does not fit).
  std::int64_t upper(long n) const {
    if (kind == Kind::Fixed) return fixed_hi;
    if (kind == Kind::Identity) return n;
    std::int64_t v = 1;
    for (long i = 0; i < n; ++i) {
      if (v > INT64_MAX / M) throw SizeError("level u_n overflows at n = " + std::to_string(n), 0);
      v *= M;
    }
    return v;
  }
};

inline const char* scheme_name(LevelScheme::Kind k) {
  switch (k) {
    case LevelScheme::Kind::Geometric: return "geometric";
    case LevelScheme::Kind::Identity: return "identity";
    case LevelScheme::Kind::Window: return "window";
    case LevelScheme::Kind::Fixed: return "fixed";
  }
  return "?";
}

struct ResonantItem {
  std::vector<std::int64_t> index;  // alpha
  double weight = 0.0;              // beta_alpha
  std::vector<FactorGeometry<Rational>> geometry;
};

/// Window of |q_k|^+ for the linear-forms level n: [ceil(Phi_k(M^n)/M), Phi_k(M^n)].
struct QWindow {
  std::vector<std::int64_t> lo, hi;
};

inline QWindow linear_window(const LinearFormsFamily& lf, long n) {
  QWindow w;
  std::int64_t u = LevelScheme::geometric(lf.M).upper(n);
  for (const auto& Phi : lf.Phi) {
    std::int64_t top = Phi.integer_at(u);
    w.hi.push_back(top);
    w.lo.push_back((top + lf.M - 1) / lf.M);
  }
  return w;
}

/// Number of integers v with max(1,|v|) in [lo, hi].
inline std::int64_t window_count(std::int64_t lo, std::int64_t hi) {
  if (hi < lo || hi < 1) return 0;
  std::int64_t c = 0;
  if (lo <= 1) c += 3;  // -1, 0, 1
  std::int64_t a = std::max<std::int64_t>(lo, 2);
  if (hi >= a) c += 2 * (hi - a + 1);
  return c;
}

inline std::vector<std::int64_t> window_values(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> v;
  for (std::int64_t x = -hi; x <= hi; ++x) {
    std::int64_t m = std::max<std::int64_t>(1, x < 0 ? -x : x);
    if (m >= lo && m <= hi) v.push_back(x);
  }
  return v;
}

/// [l_n, u_n] for the family under the scheme.
inline std::pair<std::int64_t, std::int64_t> level_bounds(const Family& f, const LevelScheme& s, long n) {
  if (std::holds_alternative<ShrinkingFamily>(f)) return {n, n};
  if (auto lf = std::get_if<LinearFormsFamily>(&f)) {
    QWindow w = linear_window(*lf, n);
    std::int64_t l = 1;
    for (std::size_t k = 0; k < w.lo.size(); ++k)
      l = std::max<std::int64_t>(l, generalized_inverse(lf->Phi[k], std::max<std::int64_t>(1, w.lo[k])));
    return {l, LevelScheme::geometric(lf->M).upper(n)};
  }
  if (s.kind == LevelScheme::Kind::Fixed) return {s.fixed_lo, s.fixed_hi};
  if (s.kind == LevelScheme::Kind::Identity) return {n, n};
  return {s.upper(n - 1), s.upper(n)};
}

inline long double ipow(long double b, int e) {
  long double r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// #J_n by closed form (long double so huge counts do not overflow).
inline long double count_level(const Family& f, const LevelScheme& s, long n) {
  if (auto r = std::get_if<RationalFamily>(&f)) {
    auto [l, u] = level_bounds(f, s, n);
    long double c = 0;
    for (std::int64_t q = l; q <= u; ++q) c += ipow(static_cast<long double>(q + 1), r->d);
    return c;
  }
  if (auto lf = std::get_if<LinearFormsFamily>(&f)) {
    // Sum over q of prod_i (2 h max|q| + 1); grouped by max|q|.
    QWindow w = linear_window(*lf, n);
    std::int64_t top = 0;
    for (auto v : w.hi) top = std::max(top, v);
    long double c = 0;
    // count of q with max|q_k| <= m, q in window
    auto upto = [&](std::int64_t m) {
      long double p = 1;
      for (std::size_t k = 0; k < w.lo.size(); ++k) {
        std::int64_t hi = std::min(w.hi[k], std::max<std::int64_t>(m, 1));
        std::int64_t cnt = window_count(w.lo[k], hi);
        if (m == 0) cnt = (w.lo[k] <= 1) ? 1 : 0;
        p *= cnt;
      }
      return p;
    };
    long double prev = upto(0);  // only q = 0, excluded below
    for (std::int64_t m = 1; m <= top; ++m) {
      long double cur = upto(m);
      c += (cur - prev) * ipow(static_cast<long double>(2 * lf->h * m + 1), lf->d);
      prev = cur;
    }
    return c;
  }
  long double c = 1;
  for (const auto& cs : std::get<ShrinkingFamily>(f).factors)
    c *= ipow(static_cast<long double>(cs.digits.size()), static_cast<int>(n));
  return c;
}

/// beta_alpha
inline double beta(const ResonantItem& item, const Family& f) {
  if (std::holds_alternative<RationalFamily>(f)) return static_cast<double>(item.index.at(0));
  if (auto lf = std::get_if<LinearFormsFamily>(&f)) {
    long b = 1;
    for (int k = 0; k < lf->h; ++k) {
      std::int64_t q = item.index.at(k);
      std::int64_t qp = std::max<std::int64_t>(1, q < 0 ? -q : q);
      b = std::max(b, generalized_inverse(lf->Phi[k], qp));
    }
    return static_cast<double>(b);
  }
  return item.weight;
}

namespace detail {

inline Rational word_center(const std::vector<int>& w, int base, const Rational& x_o) {
  Rational x(0), scale(1);
  for (int e : w) {
    scale /= base;
    x += e * scale;
  }
  return Rational(x + x_o * scale);
}

template <class F>
void for_each_word(const CantorSpec& spec, int n, F&& f) {
  std::vector<int> digits = spec.digits;
  std::sort(digits.begin(), digits.end());
  std::vector<std::size_t> idx(n, 0);
  std::vector<int> w(n);
  while (true) {
    for (int j = 0; j < n; ++j) w[j] = digits[idx[j]];
    f(w);
    int j = n - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < digits.size()) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
}

}  // namespace detail

/// All words of length n for one shrinking factor with their centers, in
/// lexicographic order.
inline std::vector<CantorPreimageGeometry<Rational>> shrinking_factor_items(const CantorSpec& spec,
                                                                            const Rational& x_o, int n) {
  std::vector<CantorPreimageGeometry<Rational>> out;
  if (n == 0) {
    out.push_back({{}, x_o});
    return out;
  }
  detail::for_each_word(spec, n, [&](const std::vector<int>& w) {
    out.push_back({w, detail::word_center(w, spec.base, x_o)});
  });
  return out;
}

/// J_n in lexicographic index order.
inline std::vector<ResonantItem> enumerate_level(const Family& f, const LevelScheme& s, long n,
                                                 std::uint64_t cap = 10'000'000) {
  validate_family(f);
  long double cnt = count_level(f, s, n);
  if (cnt > static_cast<long double>(cap))
    throw SizeError("enumerate_level: level " + std::to_string(n) + " exceeds the enumeration cap",
                    cnt > 1.8e19L ? UINT64_MAX : static_cast<std::uint64_t>(cnt));
  std::vector<ResonantItem> out;
  out.reserve(static_cast<std::size_t>(cnt));
  if (auto r = std::get_if<RationalFamily>(&f)) {
    auto [l, u] = level_bounds(f, s, n);
    for (std::int64_t q = std::max<std::int64_t>(l, 1); q <= u; ++q) {
      std::vector<std::int64_t> p(r->d, 0);
      while (true) {
        ResonantItem it;
        it.index.push_back(q);
        for (int i = 0; i < r->d; ++i) {
          it.index.push_back(p[i]);
          it.geometry.push_back(PointGeometry<Rational>{{make_rational(p[i], q)}});
        }
        it.weight = static_cast<double>(q);
        out.push_back(std::move(it));
        int i = r->d - 1;
        for (; i >= 0; --i) {
          if (++p[i] <= q) break;
          p[i] = 0;
        }
        if (i < 0) break;
      }
    }
  } else if (auto lf = std::get_if<LinearFormsFamily>(&f)) {
    QWindow w = linear_window(*lf, n);
    std::vector<std::vector<std::int64_t>> vals;
    for (int k = 0; k < lf->h; ++k) vals.push_back(window_values(w.lo[k], w.hi[k]));
    for (const auto& v : vals)
      if (v.empty()) return out;
    std::vector<std::size_t> qi(lf->h, 0);
    while (true) {
      std::vector<std::int64_t> q(lf->h);
      std::int64_t mx = 0;
      for (int k = 0; k < lf->h; ++k) {
        q[k] = vals[k][qi[k]];
        mx = std::max(mx, q[k] < 0 ? -q[k] : q[k]);
      }
      if (mx > 0) {
        std::int64_t P = lf->h * mx;
        std::vector<std::int64_t> p(lf->d, -P);
        ResonantItem proto;
        proto.index = q;
        proto.index.resize(lf->h + lf->d);
        proto.weight = beta(proto, f);
        while (true) {
          ResonantItem it = proto;
          for (int i = 0; i < lf->d; ++i) {
            it.index[lf->h + i] = p[i];
            it.geometry.push_back(AffineGeometry{q, p[i]});
          }
          out.push_back(std::move(it));
          int i = lf->d - 1;
          for (; i >= 0; --i) {
            if (++p[i] <= P) break;
            p[i] = -P;
          }
          if (i < 0) break;
        }
      }
      int k = lf->h - 1;
      for (; k >= 0; --k) {
        if (++qi[k] < vals[k].size()) break;
        qi[k] = 0;
      }
      if (k < 0) break;
    }
  } else {
    const auto& sf = std::get<ShrinkingFamily>(f);
    std::vector<std::vector<CantorPreimageGeometry<Rational>>> per;
    for (std::size_t i = 0; i < sf.factors.size(); ++i)
      per.push_back(shrinking_factor_items(sf.factors[i], sf.target[i], static_cast<int>(n)));
    std::vector<std::size_t> idx(per.size(), 0);
    while (true) {
      ResonantItem it;
      it.weight = static_cast<double>(n);
      for (std::size_t i = 0; i < per.size(); ++i) {
        const auto& g = per[i][idx[i]];
        for (int e : g.word) it.index.push_back(e);
        it.geometry.push_back(g);
      }
      out.push_back(std::move(it));
      bool done = true;
      for (std::size_t i = per.size(); i-- > 0;) {
        if (++idx[i] < per[i].size()) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
      if (done) break;
    }
  }
  return out;
}

}  // namespace limsup
