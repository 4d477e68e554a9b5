#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fmbsde/fbm.hpp"
#include "fmbsde/forward.hpp"

namespace fmbsde {
namespace verify {

/// Polynomial functional of fBm: h(I_1, ..., I_n) with I_i = int xi_i dB^H.
struct PolynomialFunctional {
  struct Term {
    double coef = 0.0;
    std::vector<int> exponents;  // one exponent per kernel
  };
  std::vector<Coefficient> kernels;
  std::vector<Term> terms;

  /// Wiener integrals of all kernels over the batch, one row per path.
  Eigen::MatrixXd integrals(const fbm::FbmPathBatch& batch) const;

  /// h evaluated at one path's integral vector.
  double eval(const Eigen::RowVectorXd& I) const;

  /// Single monomial c * I_1^{e_1} ... convenience.
  static PolynomialFunctional monomial(std::vector<Coefficient> kernels, double coef,
                                       std::vector<int> exponents);
};

/// D_s Phi = sum_i (dh/dx_i)(I) xi_i(s): per-kernel partial polynomials
/// paired with their deterministic kernel factors.
struct MalliavinDerivative {
  std::vector<PolynomialFunctional> partials;  // dh/dx_i, same kernel list
  std::vector<Coefficient> kernels;            // xi_i

  double eval(const Eigen::RowVectorXd& I, double s) const;
};

MalliavinDerivative malliavin_derivative(const PolynomialFunctional& phi);

/// int_0^T phi(t - s) xi(s) ds in closed form over the cells of xi.
double smoothed_kernel(const Coefficient& xi, double t, double T, const Hurst& h,
                       std::size_t cells = 2048);

/// D^H_t Phi = int_0^T phi(t-s) D_s Phi ds evaluated per path.
Eigen::VectorXd dh_derivative(const PolynomialFunctional& phi, double t,
                              const fbm::FbmPathBatch& batch);

/// Outcome of one Monte Carlo / quadrature identity check.
struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;  // standard error of the Monte Carlo side (0 if none)
  double z = 0.0;   // (lhs - rhs) / se, or 0 when se == 0
  bool pass(double z_max = 3.0, double abs_tol = 0.0) const {
    return se > 0.0 ? std::abs(z) <= z_max : std::abs(lhs - rhs) <= abs_tol;
  }
};

/// Duality E(Phi delta(u)) = E<D Phi, u>_T for deterministic u; both sides by
/// Monte Carlo on the same batch, z-score of the per-path difference.
CheckResult duality_check(const PolynomialFunctional& phi, const Coefficient& u,
                          const fbm::FbmPathBatch& batch);

/// Isometry for deterministic F: MC variance of int F dB against ||F||_T^2.
CheckResult isometry_check(const Coefficient& F, const fbm::FbmPathBatch& batch);

/// Isometry for the one admissible stochastic integrand F = B: lhs from the
/// closed form delta(B) = (B_T^2 - T^{2H})/2 (Monte Carlo over the batch),
/// rhs = E||B||_T^2 + int int D_s B_t D_t B_s by quadrature.
CheckResult isometry_check_fbm(const fbm::FbmPathBatch& batch);

/// Deterministic quadrature value of the F = B right-hand side (exposed for
/// tests; equals T^{4H}/2 analytically).
double fbm_isometry_rhs(double T, const Hurst& h);

/// Smooth test function with the derivatives the Ito formula needs.
struct TestFunction {
  std::string name;
  std::function<double(double, double)> value;  // F(t, x)
  std::function<double(double, double)> dt;
  std::function<double(double, double)> dx;
  std::function<double(double, double)> dxx;

  static TestFunction square();
  static TestFunction quartic();
  static TestFunction cosine();
  /// sum_k c_k x^k, degree <= 6.
  static TestFunction polynomial(std::vector<double> coeffs);
};

/// Mean-level Ito formula check: E F(t, X_t) against the drift + correction
/// terms (stochastic integral dropped, mean zero). One result per requested
/// grid index.
std::vector<CheckResult> ito_mean_check(const TestFunction& F, const ForwardSpec& spec,
                                        const fbm::FbmPathBatch& batch,
                                        const std::vector<std::size_t>& time_indices);

/// Mean-level product rule for X_i = int g_i ds + int f_i dB: E[X_1 X_2](t)
/// against the f-weighted smoothed-derivative form. One result per index.
std::vector<CheckResult> product_rule_check(const Coefficient& f1, const Coefficient& f2,
                                            const Coefficient& g1, const Coefficient& g2,
                                            const fbm::FbmPathBatch& batch,
                                            const std::vector<std::size_t>& time_indices);

}  // namespace verify
}  // namespace fmbsde
