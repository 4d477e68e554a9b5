#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fmbsde/types.hpp"

namespace fmbsde {

enum class CoeffDomain { Time, Space };

/// Deterministic scalar function of one variable (time or space), represented
/// as a piecewise-constant table, a piecewise-linear table, or an arbitrary
/// callable (typically a parsed expression).
class Coefficient {
 public:
  static Coefficient constant(double c, CoeffDomain d = CoeffDomain::Time);

  /// Piecewise constant: value values[i] on [breaks[i], breaks[i+1]).
  static Coefficient piecewise_constant(std::vector<double> breaks, std::vector<double> values,
                                        CoeffDomain d = CoeffDomain::Time);

  /// Piecewise linear interpolation through (xs[i], ys[i]).
  static Coefficient piecewise_linear(std::vector<double> xs, std::vector<double> ys,
                                      CoeffDomain d = CoeffDomain::Time);

  static Coefficient from_function(std::function<double(double)> f,
                                   CoeffDomain d = CoeffDomain::Time);

  double operator()(double u) const;

  CoeffDomain domain() const { return domain_; }
  bool is_piecewise_constant() const { return kind_ == Kind::PiecewiseConstant; }

  /// Breakpoints of a tabulated coefficient; empty for callables/constants.
  const std::vector<double>& breakpoints() const { return breaks_; }

 private:
  enum class Kind { Constant, PiecewiseConstant, PiecewiseLinear, Function };
  Kind kind_ = Kind::Constant;
  CoeffDomain domain_ = CoeffDomain::Time;
  double const_value_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> values_;
  std::function<double(double)> func_;
};

/// Piecewise-constant reduction of a coefficient on [0, t]: cell edges and one
/// value per cell. Exact for constants and piecewise-constant tables whose
/// breakpoints are merged into the partition; midpoint sampling otherwise.
struct PcProfile {
  std::vector<double> edges;   // size m+1, edges[0] = 0, edges[m] = t
  std::vector<double> values;  // size m
};

/// Builds the kernel-integration partition of [0, t]: the grid points of
/// `grid` restricted to [0, t], each cell split `refine` times, merged with
/// the coefficient's own breakpoints.
PcProfile resample_pc(const Coefficient& c, double t, const TimeGrid& grid, int refine = 8);

/// Same, but on a free uniform partition of [0, t] with m cells.
PcProfile resample_pc_uniform(const Coefficient& c, double t, std::size_t m);

}  // namespace fmbsde
