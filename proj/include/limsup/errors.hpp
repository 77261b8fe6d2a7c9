#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace limsup {

/// Malformed input: a box outside the unit cube, a digit outside its base,
/// a non-monotone rate function, ...  Carries every offending field.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what), fields_{what} {}
  explicit ValidationError(std::vector<std::string> fields)
      : std::invalid_argument(join(fields)), fields_(std::move(fields)) {}

  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (const auto& f : fields) {
      if (!out.empty()) out += "; ";
      out += f;
    }
    return out;
  }

  std::vector<std::string> fields_;
};

/// An enumeration would exceed the configured cap.
class SizeError : public std::length_error {
 public:
  SizeError(const std::string& what, std::uint64_t count)
      : std::length_error(what + " (count " + std::to_string(count) + ")"),
        count_(count) {}

  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_;
};

/// The exact sweep cannot handle the input (dimension or cell budget); the
/// caller has to fall back to Monte Carlo.
class UseStatisticalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A guaranteed postcondition failed: e.g. no Minkowski witness although the
/// volume condition holds, or psi > rho on a tested level.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class RateError : public std::domain_error {
 public:
  RateError(const std::string& what, long level)
      : std::domain_error(what), level_(level) {}

  long level() const noexcept { return level_; }

 private:
  long level_;
};

}  // namespace limsup
