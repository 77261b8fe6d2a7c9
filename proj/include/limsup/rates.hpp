#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rate_function.hpp"
#include "systems.hpp"

namespace limsup {

struct SanitizeOptions {
  long window_lo = 1;
  long window_hi = 1L << 17;
  double epsilon = 0.1;  // f(u) = (max_k Phi_k(u))^epsilon
};

struct SanitizedRates {
  SystemKind kind = SystemKind::Rational;
  int d = 1;
  int h = 1;
  long M = 2;
  std::vector<RateFunction> original;
  std::vector<RateFunction> sanitized;
  std::vector<RateFunction> Phi;
  bool full_measure = false;
  std::string full_measure_reason;
  // smoothing record on [window_lo, window_hi]
  long window_lo = 1;
  long window_hi = 1;
  long u0 = 1;
  double epsilon = 0.1;
  std::vector<char> in_n1;
  std::vector<std::vector<double>> values;  // phi~_i(u), u in window
  double c1 = 0.0, c2 = 0.0, lambda = 0.0;
  std::vector<std::string> warnings;

  bool n1(long u) const { return in_n1.at(static_cast<std::size_t>(u - window_lo)) != 0; }
  double value(std::size_t i, long u) const {
    return values.at(i).at(static_cast<std::size_t>(u - window_lo));
  }
};

namespace detail {

inline double lg(long u) { return std::log(static_cast<double>(u)); }

inline void require_nonincreasing(const std::vector<RateFunction>& fs, const char* name, long lo, long hi,
                                  std::vector<std::string>& bad) {
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (!nonincreasing_on(fs[i], lo, hi))
      bad.push_back(std::string(name) + "[" + std::to_string(i) + "] = " + fs[i].text() +
                    " is not nonincreasing on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace detail

/// Simultaneous approximation: full-measure short cut (q prod phi > 1 on the
/// tail) or phi_bar = max(phi, q^(-1-1/(2d))).
inline SanitizedRates sanitize_simultaneous(const std::vector<RateFunction>& phi, const SanitizeOptions& opt = {}) {
  SanitizedRates s;
  s.kind = SystemKind::Rational;
  s.d = static_cast<int>(phi.size());
  s.original = phi;
  s.window_lo = opt.window_lo;
  s.window_hi = opt.window_hi;
  std::vector<std::string> bad;
  if (phi.empty()) bad.push_back("system.phi: need one function per factor");
  detail::require_nonincreasing(phi, "system.phi", opt.window_lo, std::min(opt.window_hi, 20000L), bad);
  if (!bad.empty()) throw ValidationError(std::move(bad));

  bool all_large = true;
  for (long q = std::max(opt.window_hi / 2, 1L); q <= opt.window_hi && all_large; ++q) {
    double l = detail::lg(q);
    for (const auto& f : phi) l += f.log_at(detail::lg(q));
    if (!(l > 0)) all_large = false;
  }
  if (all_large) {
    s.full_measure = true;
    s.full_measure_reason = "q * prod phi_i(q) > 1 for all q in [" + std::to_string(opt.window_hi / 2) +
                            ", " + std::to_string(opt.window_hi) + "]";
    s.sanitized = phi;
    return s;
  }
  const double floor_exp = -1.0 - 1.0 / (2.0 * s.d);
  for (const auto& f : phi) {
    s.sanitized.emplace_back(
        [f, floor_exp](double lu) { return std::max(f.log_at(lu), floor_exp * lu); },
        "max(" + f.text() + ", u^" + std::to_string(floor_exp) + ")");
  }
  return s;
}

/// Linear forms: smooth phi towards f(u)/((max Phi)^d prod Phi) on the window,
/// then cap prod phi~ prod Phi <= 1.
inline SanitizedRates sanitize_linear_forms(const std::vector<RateFunction>& phi, const std::vector<RateFunction>& Phi,
                                            long M, const SanitizeOptions& opt = {}) {
  SanitizedRates s;
  s.kind = SystemKind::LinearForms;
  s.d = static_cast<int>(phi.size());
  s.h = static_cast<int>(Phi.size());
  s.M = M;
  s.original = phi;
  s.Phi = Phi;
  s.window_lo = opt.window_lo;
  s.window_hi = opt.window_hi;
  s.epsilon = opt.epsilon;
  const long lo = opt.window_lo, hi = opt.window_hi;
  std::vector<std::string> bad;
  if (phi.empty()) bad.push_back("system.phi: need one function per factor");
  if (Phi.empty()) bad.push_back("system.Phi: need one function per k <= h");
  if (M < 2) bad.push_back("system.M must be >= 2");
  if (lo < 1 || hi <= lo) bad.push_back("system.window: need 1 <= lo < hi");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  detail::require_nonincreasing(phi, "system.phi", lo, hi, bad);

  const std::size_t W = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> logmax(W), logsum(W);
  for (std::size_t k = 0; k < Phi.size(); ++k) {
    std::int64_t prev = 0;
    for (long u = lo; u <= hi; ++u) {
      std::int64_t v;
      try {
        v = Phi[k].integer_at(u);
      } catch (const ValidationError&) {
        bad.push_back("system.Phi[" + std::to_string(k) + "] = " + Phi[k].text() + " is not integer-valued at u = " +
                      std::to_string(u));
        break;
      }
      if (v < 1 || v < prev) {
        bad.push_back("system.Phi[" + std::to_string(k) + "] = " + Phi[k].text() +
                      " must be positive and nondecreasing (fails at u = " + std::to_string(u) + ")");
        break;
      }
      prev = v;
      double l = std::log(static_cast<double>(v));
      std::size_t j = static_cast<std::size_t>(u - lo);
      logmax[j] = k == 0 ? l : std::max(logmax[j], l);
      logsum[j] += l;
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  // c1 Phi(M^n) <= Phi(M^(n+1)) <= c2 Phi(M^n) on the window
  s.c1 = INFINITY;
  s.c2 = 0.0;
  for (const auto& P : Phi) {
    for (long a = 1; a <= hi / M; a *= M) {
      double r = static_cast<double>(P.integer_at(a * M)) / static_cast<double>(P.integer_at(a));
      s.c1 = std::min(s.c1, r);
      s.c2 = std::max(s.c2, r);
    }
  }
  if (!(s.c1 > 1.0))
    s.warnings.push_back("Phi growth: c1 = " + std::to_string(s.c1) + " <= 1 on the tested M-adic levels");
  s.lambda = std::isfinite(s.c1) && s.c1 > 0 ? 1.0 / s.c1 : 0.0;

  // target(u) = f(u) / ((max Phi)^d prod Phi), in logs
  std::vector<double> target(W);
  for (std::size_t j = 0; j < W; ++j) target[j] = opt.epsilon * logmax[j] - s.d * logmax[j] - logsum[j];

  s.in_n1.assign(W, 0);
  std::vector<std::vector<double>> lphi(s.d, std::vector<double>(W));
  for (std::size_t j = 0; j < W; ++j) {
    double sum = 0.0;
    for (int i = 0; i < s.d; ++i) {
      lphi[i][j] = phi[i].log_at(detail::lg(lo + static_cast<long>(j)));
      sum += lphi[i][j];
    }
    s.in_n1[j] = sum >= target[j];
  }
  std::size_t j0 = 0;
  while (j0 < W && !s.in_n1[j0]) ++j0;
  s.values.assign(s.d, std::vector<double>(W));
  for (int i = 0; i < s.d; ++i)
    for (std::size_t j = 0; j < W; ++j) s.values[i][j] = std::exp(lphi[i][j]);
  if (j0 == W) {
    // No element of N_1 in the window: start at the window and lift phi(u0).
    j0 = 0;
    double sum = 0.0;
    for (int i = 0; i < s.d; ++i) sum += lphi[i][0];
    double lift = std::exp((target[0] - sum) / s.d);
    for (int i = 0; i < s.d; ++i) s.values[i][0] *= lift;
    s.warnings.push_back("N_1 is empty on the window; phi~(u0) lifted to meet f(u0)");
  }
  s.u0 = lo + static_cast<long>(j0);

  for (std::size_t j = j0 + 1; j < W; ++j) {
    if (s.in_n1[j]) continue;
    auto logG = [&](double t) {
      double g = 0.0;
      for (int i = 0; i < s.d; ++i) g += std::log(t * s.values[i][j - 1] + (1.0 - t) * std::exp(lphi[i][j]));
      return g;
    };
    double t = 1.0;
    if (logG(1.0) < target[j]) {
      s.warnings.push_back("target f/(maxPhi^d prod Phi) increases at u = " + std::to_string(lo + j) +
                           "; t* = 1");
    } else {
      double a = 0.0, b = 1.0;
      for (int it = 0; it < 200 && b - a > 0.0; ++it) {
        double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        if (logG(m) < target[j]) a = m;
        else b = m;
      }
      t = b;
    }
    for (int i = 0; i < s.d; ++i) s.values[i][j] = t * s.values[i][j - 1] + (1.0 - t) * std::exp(lphi[i][j]);
  }

  for (std::size_t j = j0; j < W; ++j) {
    double l = logsum[j];
    for (int i = 0; i < s.d; ++i) l += std::log(s.values[i][j]);
    if (l > 1e-12) {
      s.full_measure = true;
      s.full_measure_reason = "prod phi~_i * prod Phi_k > 1 at u = " + std::to_string(lo + j);
      break;
    }
  }

  for (int i = 0; i < s.d; ++i) {
    std::map<long, double> tab;
    for (std::size_t j = 0; j < W; ++j) tab[lo + static_cast<long>(j)] = s.values[i][j];
    s.sanitized.push_back(RateFunction::table(std::move(tab), "phi~[" + std::to_string(i) + "]"));
  }
  return s;
}

/// Shrinking targets need no sanitization; psi is taken as given.
inline SanitizedRates pass_through(const std::vector<RateFunction>& psi) {
  SanitizedRates s;
  s.kind = SystemKind::Shrinking;
  s.d = static_cast<int>(psi.size());
  s.original = psi;
  s.sanitized = psi;
  return s;
}

inline SanitizedRates sanitize_rates(SystemKind kind, const std::vector<RateFunction>& phi,
                                     const std::vector<RateFunction>& Phi, long M, const SanitizeOptions& opt = {}) {
  switch (kind) {
    case SystemKind::Rational: return sanitize_simultaneous(phi, opt);
    case SystemKind::LinearForms: return sanitize_linear_forms(phi, Phi, M, opt);
    case SystemKind::Shrinking: return pass_through(phi);
  }
  throw ValidationError("unknown system kind");
}

/// Pointwise violations of phi~ >= phi, monotonicity and phi~ = phi on N_1.
inline std::vector<std::string> check_sanitized(const SanitizedRates& s, double rel_tol = 1e-12) {
  std::vector<std::string> out;
  if (s.kind != SystemKind::LinearForms) return out;
  for (int i = 0; i < s.d; ++i)
    for (long u = s.window_lo; u <= s.window_hi; ++u) {
      double v = s.value(i, u);
      double p = s.original[i](static_cast<double>(u));
      if (v < p * (1 - rel_tol)) out.push_back("phi~ < phi at u = " + std::to_string(u));
      if (u >= s.u0 && s.n1(u) && u > s.u0 && std::abs(v - p) > rel_tol * p)
        out.push_back("phi~ != phi on N_1 at u = " + std::to_string(u));
      if (u > s.window_lo && v > s.value(i, u - 1) * (1 + rel_tol))
        out.push_back("phi~ increases at u = " + std::to_string(u));
    }
  return out;
}

struct RatePair {
  SystemKind kind = SystemKind::Rational;
  std::vector<RateFunction> psi;
  std::vector<RateFunction> rho;
  LevelScheme levels;
  double lambda_psi = 0.0;  // max_n psi(u_{n+1}) / psi(u_n) on the tested levels
  double lambda_rho = 0.0;
  long first_level = 1, last_level = 1;

  double psi_at(std::size_t i, long n) const { return std::exp(psi[i].log_at(levels.log_upper(n))); }
  double rho_at(std::size_t i, long n) const { return std::exp(rho[i].log_at(levels.log_upper(n))); }

  /// Exact values when available, else the double converted exactly.
  Rational psi_exact(std::size_t i, long n) const { return exact_or_double(psi[i], n, psi_at(i, n)); }
  Rational rho_exact(std::size_t i, long n) const { return exact_or_double(rho[i], n, rho_at(i, n)); }

 private:
  Rational exact_or_double(const RateFunction& f, long n, double v) const {
    if (levels.kind == LevelScheme::Kind::Identity)
      if (auto e = f.exact_at(n)) return *e;
    return Rational(v);
  }
};

/// psi_i and rho_i for the family, checked on levels [n_lo, n_hi].
inline RatePair make_rates(const SanitizedRates& s, const Family& family, const LevelScheme& levels, long n_lo,
                           long n_hi) {
  if (s.full_measure) throw ValidationError("make_rates: full-measure flag set (" + s.full_measure_reason + ")");
  if (s.kind != family_kind(family)) throw ValidationError("make_rates: rates and family kinds differ");
  RatePair rp;
  rp.kind = s.kind;
  rp.levels = levels;
  rp.first_level = n_lo;
  rp.last_level = n_hi;
  const int d = s.d;
  if (static_cast<std::size_t>(d) != family_factors(family))
    throw ValidationError("make_rates: need one rate function per factor");

  if (s.kind == SystemKind::Rational) {
    auto phis = s.sanitized;
    for (int i = 0; i < d; ++i) {
      RateFunction f = phis[i];
      rp.psi.emplace_back([f](double lu) { return f.log_at(lu) - lu; }, f.text() + "/u");
      rp.rho.emplace_back(
          [phis, i, d](double lu) {
            double prod = lu;
            for (const auto& p : phis) prod += p.log_at(lu);
            return phis[i].log_at(lu) - lu - prod / d;
          },
          "(phi/u)(u prod phi)^(-1/d)");
    }
  } else if (s.kind == SystemKind::LinearForms) {
    const auto& lf = std::get<LinearFormsFamily>(family);
    auto phis = s.sanitized;
    auto Phi = s.Phi;
    const int h = s.h;
    const double lM = std::log(static_cast<double>(lf.M));
    auto maxPhi = [Phi](double lu) {
      double m = -INFINITY;
      for (const auto& P : Phi) m = std::max(m, P.log_at(lu));
      return m;
    };
    for (int i = 0; i < d; ++i) {
      rp.psi.emplace_back([phis, i, h, maxPhi](double lu) { return phis[i].log_at(lu) - maxPhi(lu) - std::log(h); },
                          "(1/h) phi~/max Phi");
      rp.rho.emplace_back(
          [phis, Phi, i, d, lM, maxPhi](double lu) {
            double prod = 0.0;
            for (const auto& p : phis) prod += p.log_at(lu);
            for (const auto& P : Phi) prod += P.log_at(lu);
            return lM + phis[i].log_at(lu) - maxPhi(lu) - prod / d;
          },
          "M (phi~/max Phi)(prod phi~ prod Phi)^(-1/d)");
    }
  } else {
    const auto& sf = std::get<ShrinkingFamily>(family);
    for (int i = 0; i < d; ++i) {
      const int b = sf.factors[i].base;
      RateFunction f = s.sanitized[i];
      rp.rho.push_back(RateFunction::exponential(1.0, b));
      rp.psi.emplace_back(
          [f, b](double lu) { return f.log_at(lu) - std::exp(lu) * std::log(static_cast<double>(b)); },
          f.text() + "/" + std::to_string(b) + "^u",
          [f, b](long n) -> std::optional<Rational> {
            auto e = f.exact_at(n);
            if (!e) return std::nullopt;
            return Rational(*e / Rational(boost::multiprecision::pow(BigInt(b), static_cast<unsigned>(n))));
          });
    }
  }

  for (long n = n_lo; n <= n_hi; ++n)
    for (int i = 0; i < d; ++i) {
      double lp = rp.psi[i].log_at(levels.log_upper(n));
      double lr = rp.rho[i].log_at(levels.log_upper(n));
      if (lp > lr + 1e-12)
        throw RateError("make_rates: psi_" + std::to_string(i) + " > rho_" + std::to_string(i) + " at level n = " +
                            std::to_string(n),
                        n);
      if (n > n_lo) {
        rp.lambda_psi = std::max(rp.lambda_psi, std::exp(lp - rp.psi[i].log_at(levels.log_upper(n - 1))));
        rp.lambda_rho = std::max(rp.lambda_rho, std::exp(lr - rp.rho[i].log_at(levels.log_upper(n - 1))));
      }
    }
  return rp;
}

}  // namespace limsup
