#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fmbsde/fbm.hpp"
#include "fmbsde/kernel.hpp"
#include "fmbsde/types.hpp"

namespace fmbsde {

/// The forward diffusion eta_t = eta0 + int_0^t b ds + int_0^t sigma dB^H,
/// with deterministic b and sign-definite sigma.
struct ForwardSpec {
  double eta0 = 0.0;
  Coefficient b = Coefficient::constant(0.0);
  Coefficient sigma = Coefficient::constant(1.0);
  Hurst hurst{0.75};
  TimeGrid grid = TimeGrid::uniform(1.0, 1);
  double sigma_min = kernel::kDefaultSigmaMin;

  void validate() const { kernel::check_sign_definite(sigma, grid, sigma_min); }
};

namespace forward {

/// Pathwise Euler realization of eta on the batch grid. Drift quadrature is
/// exact piecewise integration of b; the martingale part is the left-endpoint
/// Riemann-Stieltjes sum against each fBm path.
Eigen::MatrixXd simulate_eta(const ForwardSpec& spec, const fbm::FbmPathBatch& batch);

/// Exact Gaussian marginal law: mean eta0 + int_0^t b, variance ||sigma||_t^2.
GaussianLaw eta_marginal(const ForwardSpec& spec, double t);

/// int_0^t b ds by exact piecewise integration.
double drift_integral(const Coefficient& b, double t, const TimeGrid& grid, int refine = 8);

/// Marginal laws at every grid point, sharing one variance-profile pass.
std::vector<GaussianLaw> marginal_profile(const ForwardSpec& spec);

}  // namespace forward
}  // namespace fmbsde
