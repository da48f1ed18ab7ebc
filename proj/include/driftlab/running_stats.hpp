#pragma once

#include <cmath>
#include <cstdint>

namespace driftlab {

/// Streaming mean/variance (Welford) in extended precision, mergeable in a
/// fixed order (Chan et al.). Constant input keeps m2 at exactly zero.
class RunningMoments {
 public:
  void add(double value) {
    ++count_;
    const long double delta = static_cast<long double>(value) - mean_;
    mean_ += delta / static_cast<long double>(count_);
    m2_ += delta * (static_cast<long double>(value) - mean_);
  }

  void merge(const RunningMoments& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const auto na = static_cast<long double>(count_);
    const auto nb = static_cast<long double>(other.count_);
    const long double n = na + nb;
    const long double delta = other.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    count_ += other.count_;
  }

  std::int64_t count() const noexcept { return count_; }
  double mean() const noexcept { return static_cast<double>(mean_); }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const noexcept {
    return count_ < 2 ? 0.0 : static_cast<double>(m2_ / static_cast<long double>(count_ - 1));
  }
  double standard_error() const noexcept {
    return count_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(count_));
  }

 private:
  std::int64_t count_ = 0;
  long double mean_ = 0.0L;
  long double m2_ = 0.0L;
};

}  // namespace driftlab
