#include "fmbsde/fbm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fmbsde/csv.hpp"

namespace fmbsde {
namespace fbm {

double covariance(double t, double s, const Hurst& h) {
  double e = 2.0 * h.value();
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

Eigen::MatrixXd covariance_matrix(const TimeGrid& grid, const Hurst& h) {
  const auto& pts = grid.points();
  Eigen::Index n = static_cast<Eigen::Index>(pts.size()) - 1;
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = covariance(pts[i + 1], pts[j + 1], h);
  return cov;
}

namespace {

// Counter-based per-path stream: splitmix64 state derived from (seed, path).
struct NormalStream {
  std::uint64_t state;
  bool have_spare = false;
  double spare = 0.0;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  NormalStream(std::uint64_t seed, std::uint64_t path) {
    // Hash (seed, path) fully: an initial state that is merely affine in the
    // path index makes neighbouring paths walk shifted copies of the same
    // counter sequence, which correlates them.
    state = mix(seed + 0x9E3779B97F4A7C15ull * (path + 1)) ^
            mix(path + 0xD1B54A32D192ED03ull);
  }

  std::uint64_t next_u64() { return mix(state += 0x9E3779B97F4A7C15ull); }

  double next_uniform() {  // (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() {  // Box-Muller
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    double u = next_uniform(), v = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 2.0 * M_PI * v;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a);
  }
};

}  // namespace

FbmPathBatch sample_paths(const TimeGrid& grid, const Hurst& h, std::size_t n_paths,
                          std::uint64_t seed, Parallelism par) {
  Eigen::MatrixXd cov = covariance_matrix(grid, h);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "fbm covariance factorization failed; check the grid for near-duplicate times");
  Eigen::MatrixXd L = llt.matrixL();
  const Eigen::Index n = cov.rows();

  FbmPathBatch batch{grid, h, seed, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths),
                                                          n + 1)};
  const std::int64_t np = static_cast<std::int64_t>(n_paths);
  const bool parallel = (par == Parallelism::OpenMP);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t p = 0; p < np; ++p) {
    NormalStream rng(seed, static_cast<std::uint64_t>(p));
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.next_normal();
    // Lower-triangular product, row by row.
    for (Eigen::Index i = 0; i < n; ++i)
      batch.paths(p, i + 1) = L.row(i).head(i + 1).dot(z.head(i + 1));
  }
  return batch;
}

Eigen::VectorXd wiener_integral_samples(const Coefficient& sigma, const FbmPathBatch& batch) {
  const auto& pts = batch.grid.points();
  Eigen::VectorXd weights(static_cast<Eigen::Index>(pts.size()) - 1);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    weights(static_cast<Eigen::Index>(k)) = sigma(pts[k]);
  Eigen::Index n = weights.size();
  // sum_k sigma(t_k) (B_{k+1} - B_k)
  return (batch.paths.rightCols(n) - batch.paths.leftCols(n)) * weights;
}

void export_csv(const FbmPathBatch& batch, const std::string& path) {
  CsvTable table;
  const auto& pts = batch.grid.points();
  for (std::size_t k = 0; k < pts.size(); ++k) table.header.push_back("t_" + std::to_string(k));
  table.rows.resize(batch.n_paths());
  for (std::size_t p = 0; p < batch.n_paths(); ++p) {
    table.rows[p].resize(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
      table.rows[p][k] = batch.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
  }
  write_csv(table, path);
}

}  // namespace fbm
}  // namespace fmbsde
