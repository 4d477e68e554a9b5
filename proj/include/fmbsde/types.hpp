#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmbsde {

/// Hurst parameter, restricted to the long-range-dependence regime (1/2, 1).
class Hurst {
 public:
  explicit Hurst(double value) : value_(value) {
    if (!(value > 0.5) || !(value < 1.0))
      throw std::invalid_argument("Hurst parameter must lie strictly in (1/2, 1), got " +
                                  std::to_string(value));
  }
  double value() const { return value_; }

 private:
  double value_;
};

/// Ordered partition of [0, T]. First point is 0, last is the horizon T.
class TimeGrid {
 public:
  TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("TimeGrid needs at least two points");
    if (points_.front() != 0.0) throw std::invalid_argument("TimeGrid must start at 0");
    for (std::size_t i = 1; i < points_.size(); ++i)
      if (!(points_[i] > points_[i - 1]))
        throw std::invalid_argument("TimeGrid points must be strictly increasing");
  }

  static TimeGrid uniform(double horizon, std::size_t n_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (n_steps < 1) throw std::invalid_argument("need at least one step");
    std::vector<double> pts(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i)
      pts[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
    pts.back() = horizon;
    return TimeGrid(std::move(pts));
  }

  const std::vector<double>& points() const { return points_; }
  double horizon() const { return points_.back(); }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double dt(std::size_t i) const { return points_[i + 1] - points_[i]; }

  /// Index of a grid point equal to t (within a small slack), or throws.
  std::size_t index_of(double t) const;

 private:
  std::vector<double> points_;
};

struct GaussianLaw {
  double mean = 0.0;
  double variance = 0.0;
};

}  // namespace fmbsde
