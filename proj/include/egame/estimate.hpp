#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace egame {

/// Which functional of the cost stream an estimate targets.
struct PayoffKind {
  bool discounted = false;
  double alpha = 0.0;  ///< discount rate, meaningful only when discounted

  static PayoffKind ergodic() { return {}; }
  static PayoffKind discount(double rate) { return {true, rate}; }

  std::string name() const { return discounted ? "discounted" : "ergodic"; }
};

/// Monte Carlo estimate with a path-to-path standard error.
struct PayoffEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double horizon = 0.0;
  double burn_in = 0.0;
  std::size_t n_paths = 0;
  std::optional<std::size_t> player;
  PayoffKind kind;
};

/// Welford running mean/variance; exact for constant streams.
class RunningMoments {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double sample_variance() const noexcept {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace egame
