#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "exact.hpp"

namespace limsup {

/// Positive function of u >= 1, evaluated in the log domain so that
/// u = M^10000 is fine.  Forms: c*u^a*log(u)^b, c*B^-u, tables, composites.
class RateFunction {
 public:
  using LogFn = std::function<double(double)>;
  using ExactFn = std::function<std::optional<Rational>(long)>;

  RateFunction() = default;
  RateFunction(LogFn log_fn, std::string text, ExactFn exact = {})
      : log_fn_(std::move(log_fn)), exact_fn_(std::move(exact)), text_(std::move(text)) {}

  static RateFunction power_log(double c, double a, double b = 0.0) {
    if (!(c > 0)) throw ValidationError("rate function: constant must be positive");
    std::ostringstream os;
    os << c << "*u^" << a << "*log(u)^" << b;
    double lc = std::log(c);
    LogFn f = [lc, a, b](double lu) { return lc + a * lu + (b == 0.0 ? 0.0 : b * std::log(lu)); };
    ExactFn ex;
    if (b == 0.0 && a == std::round(a) && std::abs(a) < 64) {
      ex = [c, a](long u) -> std::optional<Rational> {
        Rational v(c);
        Rational uu(u);
        long k = static_cast<long>(std::abs(a));
        for (long i = 0; i < k; ++i) v = a > 0 ? Rational(v * uu) : Rational(v / uu);
        return v;
      };
    }
    return RateFunction(std::move(f), os.str(), std::move(ex));
  }

  /// c * base^(-u)
  static RateFunction exponential(double c, double base) {
    if (!(c > 0) || !(base > 1)) throw ValidationError("rate function: need c > 0 and base > 1");
    std::ostringstream os;
    os << c << "*" << base << "^-u";
    double lc = std::log(c), lb = std::log(base);
    LogFn f = [lc, lb](double lu) { return lc - std::exp(lu) * lb; };
    ExactFn ex = [c, base](long u) -> std::optional<Rational> {
      if (base != std::round(base)) return std::nullopt;
      BigInt p = boost::multiprecision::pow(BigInt(static_cast<long>(base)), static_cast<unsigned>(u));
      return Rational(Rational(c) / Rational(p));
    };
    return RateFunction(std::move(f), os.str(), std::move(ex));
  }

  static RateFunction table(std::map<long, double> values, std::string text = "table") {
    for (const auto& [u, v] : values)
      if (!(v > 0)) throw ValidationError("rate function: table values must be positive");
    auto tab = std::make_shared<const std::map<long, double>>(std::move(values));
    LogFn f = [tab](double lu) {
      long u = std::lround(std::exp(lu));
      auto it = tab->find(u);
      if (it == tab->end()) throw RateError("rate table has no entry for u = " + std::to_string(u), u);
      return std::log(it->second);
    };
    ExactFn ex = [tab](long u) -> std::optional<Rational> {
      auto it = tab->find(u);
      if (it == tab->end()) return std::nullopt;
      return Rational(it->second);
    };
    return RateFunction(std::move(f), std::move(text), std::move(ex));
  }

  /// "c*u^a*log(u)^b", "c*B^-u" (factors in any order, each optional) or
  /// "table:u=v,u=v,...".
  static RateFunction parse(std::string_view spec) {
    std::string s;
    for (char ch : spec)
      if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw ValidationError("rate function: empty expression");
    if (s.rfind("table:", 0) == 0) {
      std::map<long, double> vals;
      std::stringstream ss(s.substr(6));
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("rate function: bad table entry '" + item + "'");
        vals[std::stol(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
      }
      return table(std::move(vals), std::string(spec));
    }
    static const std::regex num(R"(^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$)");
    static const std::regex pw(R"(^u(\^\(?([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)\)?)?$)");
    static const std::regex lg(R"(^log\(u\)(\^\(?([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)\)?)?$)");
    static const std::regex ex(R"(^(\d+\.?\d*)\^\(?-u\)?$)");
    double c = 1.0, a = 0.0, b = 0.0, base = 0.0;
    std::stringstream ss(s);
    std::string tok;
    std::smatch m;
    while (std::getline(ss, tok, '*')) {
      if (std::regex_match(tok, m, num)) {
        c *= std::stod(tok);
      } else if (std::regex_match(tok, m, pw)) {
        a += m[2].matched ? std::stod(m[2].str()) : 1.0;
      } else if (std::regex_match(tok, m, lg)) {
        b += m[2].matched ? std::stod(m[2].str()) : 1.0;
      } else if (std::regex_match(tok, m, ex)) {
        if (base != 0.0) throw ValidationError("rate function: two exponential factors");
        base = std::stod(m[1].str());
      } else {
        throw ValidationError("rate function: cannot parse factor '" + tok + "' in '" + s + "'");
      }
    }
    if (base != 0.0) {
      if (a != 0.0 || b != 0.0)
        throw ValidationError("rate function: exponential form cannot be mixed with powers of u");
      return exponential(c, base);
    }
    return power_log(c, a, b);
  }

  explicit operator bool() const { return static_cast<bool>(log_fn_); }

  double log_at(double log_u) const { return log_fn_(log_u); }
  double operator()(double u) const { return std::exp(log_fn_(std::log(u))); }
  double at_power(double base, double exponent) const {
    return std::exp(log_fn_(exponent * std::log(base)));
  }

  std::optional<Rational> exact_at(long u) const {
    if (!exact_fn_) return std::nullopt;
    return exact_fn_(u);
  }
  bool has_exact() const { return static_cast<bool>(exact_fn_); }

  /// Value at an integer u for integer-valued functions such as Phi.
  std::int64_t integer_at(long u) const {
    if (auto e = exact_at(u)) {
      if (boost::multiprecision::denominator(*e) == 1)
        return boost::multiprecision::numerator(*e).convert_to<std::int64_t>();
    }
    double v = (*this)(static_cast<double>(u));
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v)))
      throw ValidationError("rate function " + text_ + " is not integer-valued at u = " +
                            std::to_string(u));
    return static_cast<std::int64_t>(r);
  }

  const std::string& text() const { return text_; }

 private:
  LogFn log_fn_;
  ExactFn exact_fn_;
  std::string text_;
};

/// min{u >= 1 : Phi(u) >= m} for nondecreasing Phi.
inline long generalized_inverse(const RateFunction& Phi, std::int64_t m, long limit = 1L << 40) {
  if (Phi.integer_at(1) >= m) return 1;
  long lo = 1, hi = 2;
  while (Phi.integer_at(hi) < m) {
    lo = hi;
    hi *= 2;
    if (hi > limit) throw RateError("generalized inverse: Phi never reaches " + std::to_string(m), hi);
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (Phi.integer_at(mid) >= m) hi = mid;
    else lo = mid;
  }
  return hi;
}

/// true iff f is nonincreasing on the integers in [from, to].
inline bool nonincreasing_on(const RateFunction& f, long from, long to) {
  double prev = f.log_at(std::log(static_cast<double>(from)));
  for (long u = from + 1; u <= to; ++u) {
    double v = f.log_at(std::log(static_cast<double>(u)));
    if (v > prev + 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = v;
  }
  return true;
}

}  // namespace limsup
