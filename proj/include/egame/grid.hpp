#pragma once

#include <cmath>
#include <cstddef>

#include "egame/errors.hpp"

namespace egame {

/// Uniform one-dimensional grid on [x_min, x_max] with m nodes.
///
/// The reference node (nearest to 0) pins the additive constant of ergodic
/// value functions. `interior_margin` nodes at each end are excluded from
/// residual and convergence norms.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t m, std::size_t interior_margin = 5);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return m_; }
  double dx() const noexcept { return dx_; }
  std::size_t interior_margin() const noexcept { return margin_; }
  std::size_t ref_index() const noexcept { return ref_; }

  double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

  /// Nearest node, clamped to the grid.
  std::size_t nearest(double x) const noexcept {
    const double s = std::round((x - x_min_) / dx_);
    if (!(s > 0.0)) return 0;
    if (s >= static_cast<double>(m_ - 1)) return m_ - 1;
    return static_cast<std::size_t>(s);
  }

  /// First and one-past-last node used in interior norms.
  std::size_t interior_begin() const noexcept { return margin_; }
  std::size_t interior_end() const noexcept { return m_ - margin_; }

  /// Linear interpolation of nodal values, constant beyond the ends.
  template <class Values>
  double interpolate(const Values& values, double x) const {
    const double s = (x - x_min_) / dx_;
    if (!(s > 0.0)) return values[0];
    if (s >= static_cast<double>(m_ - 1)) return values[m_ - 1];
    const auto j = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * values[j] + w * values[j + 1];
  }

  bool operator==(const Grid1D& other) const noexcept {
    return x_min_ == other.x_min_ && x_max_ == other.x_max_ && m_ == other.m_ &&
           margin_ == other.margin_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t m_;
  std::size_t margin_;
  double dx_;
  std::size_t ref_;
};

}  // namespace egame
