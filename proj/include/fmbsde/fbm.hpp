#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "fmbsde/coefficient.hpp"
#include "fmbsde/types.hpp"

namespace fmbsde {
namespace fbm {

/// Covariance of fBm at (t, s): (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double covariance(double t, double s, const Hurst& h);

/// Covariance matrix over the positive grid points (the t = 0 row/column is
/// degenerate and excluded).
Eigen::MatrixXd covariance_matrix(const TimeGrid& grid, const Hurst& h);

enum class Parallelism { Serial, OpenMP };

/// A batch of exact fBm sample paths. paths(p, k) holds path p at grid point
/// k; column 0 (t = 0) is identically zero.
struct FbmPathBatch {
  TimeGrid grid = TimeGrid::uniform(1.0, 1);
  Hurst hurst{0.75};
  std::uint64_t seed = 0;
  Eigen::MatrixXd paths;  // n_paths x grid.size()

  std::size_t n_paths() const { return static_cast<std::size_t>(paths.rows()); }
};

/// Exact joint Gaussian sampling through the Cholesky factor of the grid
/// covariance. Per-path normal streams are derived from (seed, path index),
/// so the result is independent of scheduling order.
FbmPathBatch sample_paths(const TimeGrid& grid, const Hurst& h, std::size_t n_paths,
                          std::uint64_t seed, Parallelism par = Parallelism::OpenMP);

/// Left-endpoint Riemann-Stieltjes integral of a deterministic sigma against
/// each path: sum_k sigma(t_k) (B_{k+1} - B_k). One value per path.
Eigen::VectorXd wiener_integral_samples(const Coefficient& sigma, const FbmPathBatch& batch);

/// CSV export: header t_0,...,t_n, one row per path.
void export_csv(const FbmPathBatch& batch, const std::string& path);

}  // namespace fbm
}  // namespace fmbsde
