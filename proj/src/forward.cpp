#include "fmbsde/forward.hpp"

#include <stdexcept>

namespace fmbsde {
namespace forward {

double drift_integral(const Coefficient& b, double t, const TimeGrid& grid, int refine) {
  if (t == 0.0) return 0.0;
  // Midpoint rule per refined cell: exact for piecewise-constant (breakpoints
  // are merged into the partition) and for piecewise-linear coefficients.
  PcProfile p = resample_pc(b, t, grid, refine);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.edges.size(); ++i)
    total += p.values[i] * (p.edges[i + 1] - p.edges[i]);
  return total;
}

Eigen::MatrixXd simulate_eta(const ForwardSpec& spec, const fbm::FbmPathBatch& batch) {
  if (batch.grid.points() != spec.grid.points())
    throw std::invalid_argument("simulate_eta: batch grid differs from spec grid");
  if (batch.hurst.value() != spec.hurst.value())
    throw std::invalid_argument("simulate_eta: batch Hurst differs from spec Hurst");
  const auto& pts = spec.grid.points();
  const std::size_t n = pts.size();

  std::vector<double> drift(n), sig(n);
  for (std::size_t k = 0; k < n; ++k) {
    drift[k] = drift_integral(spec.b, pts[k], spec.grid);
    sig[k] = spec.sigma(pts[k]);
  }

  Eigen::MatrixXd eta(batch.paths.rows(), batch.paths.cols());
  const std::int64_t np = batch.paths.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    double mart = 0.0;
    eta(p, 0) = spec.eta0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      mart += sig[k] * (batch.paths(p, k + 1) - batch.paths(p, k));
      eta(p, k + 1) = spec.eta0 + drift[k + 1] + mart;
    }
  }
  return eta;
}

GaussianLaw eta_marginal(const ForwardSpec& spec, double t) {
  if (t < 0.0 || t > spec.grid.horizon() * (1.0 + 1e-12))
    throw std::invalid_argument("eta_marginal: t outside [0, T]");
  GaussianLaw law;
  law.mean = spec.eta0 + drift_integral(spec.b, t, spec.grid);
  law.variance = t == 0.0 ? 0.0
                          : kernel::inner_product(spec.sigma, spec.sigma, t, spec.hurst, spec.grid);
  return law;
}

std::vector<GaussianLaw> marginal_profile(const ForwardSpec& spec) {
  const auto& pts = spec.grid.points();
  std::vector<double> var = kernel::variance_profile(spec.sigma, spec.grid, spec.hurst);
  std::vector<GaussianLaw> laws(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    laws[k].mean = spec.eta0 + drift_integral(spec.b, pts[k], spec.grid);
    laws[k].variance = std::max(0.0, var[k]);
  }
  return laws;
}

}  // namespace forward
}  // namespace fmbsde
