#pragma once

#include <functional>
#include <vector>

#include "fmbsde/types.hpp"

namespace fmbsde {

/// Gauss-Hermite rule with weights normalized to sum to 1, i.e. nodes/weights
/// for E[g(N(0,1))] ~= sum_i w_i g(x_i).
struct GaussHermite {
  explicit GaussHermite(int n);
  std::vector<double> nodes;    // standard-normal abscissae
  std::vector<double> weights;  // sum to 1

  /// E[g(X)] for X ~ N(mean, variance). Collapses to a point mass when the
  /// variance is (numerically) zero.
  double expect(const GaussianLaw& law, const std::function<double(double)>& g) const;
};

/// Fixed-order Gauss-Legendre integral of f over [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int order = 5);

/// Adaptive Simpson quadrature; handles mild (integrable) endpoint
/// singularities by recursion.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

}  // namespace fmbsde
