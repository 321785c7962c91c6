#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace brwre {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// log(sum exp(x_i)); -inf for an empty span or all -inf entries.
inline double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// A positive quantity stored as mantissa * exp(log_offset).
struct ScaledValue {
  double mantissa = 0.0;
  double log_offset = 0.0;

  double log() const { return mantissa > 0.0 ? std::log(mantissa) + log_offset : kNegInf; }
  double value() const { return mantissa * std::exp(log_offset); }

  static ScaledValue from_log(double log_value) {
    if (log_value == kNegInf) return {0.0, 0.0};
    return {1.0, log_value};
  }
};

/// Streaming mean of exp(w_i) given log-weights w_i, kept in log space.
/// Tracks first and second moments relative to a running maximum so heavy
/// tailed weights neither overflow nor lose precision.
class LogMeanAccumulator {
 public:
  void add(double log_weight) {
    ++count_;
    if (log_weight == kNegInf) return;
    if (log_weight > shift_) {
      const double r = std::exp(shift_ - log_weight);
      sum_ *= r;
      sum_sq_ *= r * r;
      shift_ = log_weight;
    }
    const double s = std::exp(log_weight - shift_);
    sum_ += s;
    sum_sq_ += s * s;
  }

  void merge(const LogMeanAccumulator& other) {
    if (other.sum_ > 0.0) {
      if (other.shift_ > shift_) {
        const double r = std::exp(shift_ - other.shift_);
        sum_ *= r;
        sum_sq_ *= r * r;
        shift_ = other.shift_;
      }
      const double r = std::exp(other.shift_ - shift_);
      sum_ += other.sum_ * r;
      sum_sq_ += other.sum_sq_ * r * r;
    }
    count_ += other.count_;
  }

  long long count() const { return count_; }

  /// log of the sample mean of exp(w).
  double log_mean() const {
    if (count_ == 0 || sum_ <= 0.0) return kNegInf;
    return shift_ + std::log(sum_ / static_cast<double>(count_));
  }

  /// Delta-method standard error of log_mean(): se(mean) / mean.
  double log_stderr() const {
    if (count_ < 2 || sum_ <= 0.0) return kNaN;
    const double n = static_cast<double>(count_);
    const double mean = sum_ / n;
    const double var = std::max(0.0, (sum_sq_ - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n) / mean;
  }

 private:
  long long count_ = 0;
  double shift_ = kNegInf;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

}  // namespace brwre
