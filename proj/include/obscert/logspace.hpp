#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace obscert {

/// A nonnegative quantity carried by its natural logarithm.
///
/// Constants in this library routinely reach 10^500 and beyond (k!^sigma,
/// delta^-(n+1), kappa^K), so every bound is assembled in log-space and only
/// converted back when a decimal representation is requested.
class LogValue {
 public:
  constexpr LogValue() = default;

  static constexpr LogValue zero() {
    return LogValue(-std::numeric_limits<double>::infinity());
  }
  static constexpr LogValue one() { return LogValue(0.0); }
  static constexpr LogValue from_log(double log_value) {
    return LogValue(log_value);
  }
  static LogValue from_value(double value) {
    return LogValue(value > 0.0 ? std::log(value)
                                : -std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] constexpr double log() const { return log_; }
  [[nodiscard]] double log10() const { return log_ / std::numbers::ln10; }
  /// May overflow to +inf; use log() when the magnitude is unknown.
  [[nodiscard]] double value() const { return std::exp(log_); }
  [[nodiscard]] bool is_zero() const { return std::isinf(log_) && log_ < 0; }
  [[nodiscard]] bool representable() const {
    return log_ < std::log(std::numeric_limits<double>::max());
  }

  friend LogValue operator*(LogValue a, LogValue b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogValue(a.log_ + b.log_);
  }
  friend LogValue operator/(LogValue a, LogValue b) {
    if (a.is_zero()) return zero();
    return LogValue(a.log_ - b.log_);
  }
  friend LogValue operator+(LogValue a, LogValue b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double hi = std::max(a.log_, b.log_);
    const double lo = std::min(a.log_, b.log_);
    return LogValue(hi + std::log1p(std::exp(lo - hi)));
  }
  [[nodiscard]] LogValue pow(double exponent) const {
    if (is_zero()) return exponent > 0 ? zero() : one();
    return LogValue(log_ * exponent);
  }

  friend constexpr auto operator<=>(LogValue a, LogValue b) {
    return a.log_ <=> b.log_;
  }
  friend constexpr bool operator==(LogValue a, LogValue b) = default;

 private:
  constexpr explicit LogValue(double log_value) : log_(log_value) {}
  double log_ = 0.0;
};

/// log(k!) via lgamma.
inline double log_factorial(int k) { return std::lgamma(k + 1.0); }

/// log of a sum given the logs of its terms.
inline double log_sum_exp(std::span<const double> logs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : logs) hi = std::max(hi, v);
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

}  // namespace obscert
