#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "exact.hpp"

namespace limsup {

template <class T>
struct Interval {
  T lo{};
  T hi{};

  T length() const { return T(hi - lo); }
  bool degenerate() const { return !(lo < hi); }
};

/// Axis-aligned closed box inside the unit cube.
template <class T>
class BasicBox {
 public:
  BasicBox() = default;

  explicit BasicBox(std::vector<Interval<T>> axes) : axes_(std::move(axes)) {
    std::vector<std::string> bad;
    for (std::size_t j = 0; j < axes_.size(); ++j) {
      const auto& a = axes_[j];
      if (a.hi < a.lo) bad.push_back("box axis " + std::to_string(j) + ": lo > hi");
      if (a.lo < 0 || a.hi > 1)
        bad.push_back("box axis " + std::to_string(j) + ": endpoint outside [0,1]");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }

  static BasicBox cube(std::size_t dim) {
    return BasicBox(std::vector<Interval<T>>(dim, Interval<T>{T(0), T(1)}));
  }

  std::size_t dim() const { return axes_.size(); }
  const Interval<T>& operator[](std::size_t j) const { return axes_[j]; }
  const std::vector<Interval<T>>& axes() const { return axes_; }

  bool degenerate() const {
    for (const auto& a : axes_)
      if (a.degenerate()) return true;
    return false;
  }

  T lebesgue_volume() const {
    T v(1);
    for (const auto& a : axes_) v *= a.length();
    return v;
  }

  /// Intersection with positive volume, if any.
  std::optional<BasicBox> intersect(const BasicBox& o) const {
    std::vector<Interval<T>> out(axes_.size());
    for (std::size_t j = 0; j < axes_.size(); ++j) {
      out[j].lo = max_of(axes_[j].lo, o.axes_[j].lo);
      out[j].hi = min_of(axes_[j].hi, o.axes_[j].hi);
      if (!(out[j].lo < out[j].hi)) return std::nullopt;
    }
    BasicBox b;
    b.axes_ = std::move(out);
    return b;
  }

  template <class P>
  bool contains(const P& point) const {
    for (std::size_t j = 0; j < axes_.size(); ++j) {
      double x = point[j];
      if (x < to_double(axes_[j].lo) || x > to_double(axes_[j].hi)) return false;
    }
    return true;
  }

  template <class U>
  BasicBox<U> convert() const {
    std::vector<Interval<U>> out;
    out.reserve(axes_.size());
    for (const auto& a : axes_) {
      if constexpr (std::is_floating_point_v<U>)
        out.push_back({to_double(a.lo), to_double(a.hi)});
      else
        out.push_back({U(a.lo), U(a.hi)});
    }
    return BasicBox<U>(std::move(out));
  }

  bool operator==(const BasicBox& o) const {
    if (axes_.size() != o.axes_.size()) return false;
    for (std::size_t j = 0; j < axes_.size(); ++j)
      if (axes_[j].lo != o.axes_[j].lo || axes_[j].hi != o.axes_[j].hi) return false;
    return true;
  }

 private:
  std::vector<Interval<T>> axes_;
};

using Box = BasicBox<double>;
using ExactBox = BasicBox<Rational>;

/// Product of balls B(center_j, half_j), one entry per ambient axis.
template <class T>
struct CenteredRect {
  std::vector<T> center;
  std::vector<T> half;
};

struct CantorSpec {
  int base = 2;
  std::vector<int> digits;

  CantorSpec() = default;
  CantorSpec(int b, std::vector<int> d) : base(b), digits(std::move(d)) { validate(); }

  void validate() const {
    std::vector<std::string> bad;
    if (base < 2) bad.push_back("digits (Lambda): base must be >= 2");
    if (digits.size() < 2) bad.push_back("digits (Lambda): need at least two digits");
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (digits[i] < 0 || digits[i] >= base)
        bad.push_back("digits (Lambda): digit " + std::to_string(digits[i]) +
                      " out of range for base " + std::to_string(base));
      for (std::size_t j = 0; j < i; ++j)
        if (digits[i] == digits[j])
          bad.push_back("digits (Lambda): repeated digit " + std::to_string(digits[i]));
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }

  double delta() const {
    return std::log(static_cast<double>(digits.size())) / std::log(static_cast<double>(base));
  }
  bool full() const { return static_cast<int>(digits.size()) == base; }
  bool has_digit(int k) const {
    for (int d : digits)
      if (d == k) return true;
    return false;
  }
};

enum class MeasureKind { Lebesgue, Cantor };

struct FactorSpace {
  int dim = 1;
  double delta = 1.0;
  double kappa = 0.0;
  MeasureKind kind = MeasureKind::Lebesgue;
  std::optional<CantorSpec> cantor;
  bool torus = true;

  static FactorSpace lebesgue(int dim, double kappa = 0.0, bool torus = true) {
    FactorSpace f;
    f.dim = dim;
    f.delta = dim;
    f.kappa = kappa;
    f.torus = torus;
    f.validate();
    return f;
  }

  /// A Cantor factor with a full digit set is Lebesgue measure; it is stored
  /// as such so measures stay exact at non-b-adic endpoints.
  static FactorSpace cantor_factor(const CantorSpec& spec, double kappa = 0.0, bool torus = true) {
    spec.validate();
    if (spec.full()) return lebesgue(1, kappa, torus);
    FactorSpace f;
    f.dim = 1;
    f.delta = spec.delta();
    f.kappa = kappa;
    f.kind = MeasureKind::Cantor;
    f.cantor = spec;
    f.torus = torus;
    f.validate();
    return f;
  }

  void validate() const {
    std::vector<std::string> bad;
    if (dim < 1) bad.push_back("factor: dimension must be >= 1");
    if (!(kappa >= 0.0 && kappa < 1.0)) bad.push_back("factor: kappa must lie in [0,1)");
    if (kind == MeasureKind::Lebesgue && delta != dim)
      bad.push_back("factor: Lebesgue delta must equal the dimension");
    if (kind == MeasureKind::Cantor) {
      if (!cantor) bad.push_back("factor: Cantor kind without digit spec");
      else if (dim != 1) bad.push_back("factor: Cantor kind must be one-dimensional");
      else if (std::abs(delta - cantor->delta()) > 1e-12)
        bad.push_back("factor: Cantor delta must equal log#Lambda/log b");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
};

class AmbientSpace {
 public:
  AmbientSpace() = default;
  explicit AmbientSpace(std::vector<FactorSpace> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw ValidationError("space: need at least one factor");
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      factors_[i].validate();
      for (int k = 0; k < factors_[i].dim; ++k) axis_factor_.push_back(i);
    }
  }

  static AmbientSpace lebesgue_cube(int dim, bool torus = true) {
    return AmbientSpace({FactorSpace::lebesgue(dim, 0.0, torus)});
  }

  const std::vector<FactorSpace>& factors() const { return factors_; }
  std::size_t factor_count() const { return factors_.size(); }
  std::size_t total_dim() const { return axis_factor_.size(); }
  std::size_t axis_factor(std::size_t axis) const { return axis_factor_.at(axis); }

  std::size_t factor_offset(std::size_t i) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < i; ++k) off += factors_[k].dim;
    return off;
  }

  bool axis_torus(std::size_t axis) const { return factors_[axis_factor(axis)].torus; }

  const CantorSpec* axis_cantor(std::size_t axis) const {
    const auto& f = factors_[axis_factor(axis)];
    return f.kind == MeasureKind::Cantor ? &*f.cantor : nullptr;
  }

  bool all_lebesgue() const {
    for (const auto& f : factors_)
      if (f.kind != MeasureKind::Lebesgue) return false;
    return true;
  }

 private:
  std::vector<FactorSpace> factors_;
  std::vector<std::size_t> axis_factor_;
};

enum class Method { ExactSweep, GridOracle, MonteCarlo };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::ExactSweep: return "exact-sweep";
    case Method::GridOracle: return "grid-oracle";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

struct MeasureEstimate {
  double value = 0.0;
  double error = 0.0;
  Method method = Method::ExactSweep;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;

  std::string tag() const {
    if (method != Method::MonteCarlo) return method_name(method);
    return std::string("monte-carlo{seed=") + std::to_string(seed) +
           ",samples=" + std::to_string(samples) + "}";
  }
};

/// value + error brackets the true measure.
template <class T>
struct Bracket {
  T value{};
  T error{};
};

}  // namespace limsup
