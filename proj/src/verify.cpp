#include "fmbsde/verify.hpp"

#include <cmath>
#include <stdexcept>

#include "fmbsde/kernel.hpp"
#include "fmbsde/quadrature.hpp"

namespace fmbsde {
namespace verify {

namespace {

double signed_pow(double x, double p) {
  if (x == 0.0) return 0.0;
  return (x > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(x), p);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const Eigen::VectorXd& samples) {
  const double n = static_cast<double>(samples.size());
  MeanSe out;
  out.mean = samples.mean();
  if (samples.size() > 1) {
    const double var = (samples.array() - out.mean).square().sum() / (n - 1.0);
    out.se = std::sqrt(var / n);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd PolynomialFunctional::integrals(const fbm::FbmPathBatch& batch) const {
  Eigen::MatrixXd I(batch.paths.rows(), static_cast<Eigen::Index>(kernels.size()));
  for (std::size_t i = 0; i < kernels.size(); ++i)
    I.col(static_cast<Eigen::Index>(i)) = fbm::wiener_integral_samples(kernels[i], batch);
  return I;
}

double PolynomialFunctional::eval(const Eigen::RowVectorXd& I) const {
  double total = 0.0;
  for (const Term& term : terms) {
    double prod = term.coef;
    for (std::size_t i = 0; i < term.exponents.size(); ++i) {
      for (int e = 0; e < term.exponents[i]; ++e) prod *= I(static_cast<Eigen::Index>(i));
    }
    total += prod;
  }
  return total;
}

PolynomialFunctional PolynomialFunctional::monomial(std::vector<Coefficient> kernels, double coef,
                                                    std::vector<int> exponents) {
  if (kernels.size() != exponents.size())
    throw std::invalid_argument("monomial: one exponent per kernel required");
  PolynomialFunctional phi;
  phi.kernels = std::move(kernels);
  phi.terms.push_back({coef, std::move(exponents)});
  return phi;
}

double MalliavinDerivative::eval(const Eigen::RowVectorXd& I, double s) const {
  double total = 0.0;
  for (std::size_t i = 0; i < kernels.size(); ++i)
    total += partials[i].eval(I) * kernels[i](s);
  return total;
}

MalliavinDerivative malliavin_derivative(const PolynomialFunctional& phi) {
  MalliavinDerivative d;
  d.kernels = phi.kernels;
  d.partials.resize(phi.kernels.size());
  for (std::size_t i = 0; i < phi.kernels.size(); ++i) {
    d.partials[i].kernels = phi.kernels;
    for (const auto& term : phi.terms) {
      if (term.exponents[i] == 0) continue;
      PolynomialFunctional::Term dt = term;
      dt.coef *= term.exponents[i];
      dt.exponents[i] -= 1;
      d.partials[i].terms.push_back(std::move(dt));
    }
  }
  return d;
}

double smoothed_kernel(const Coefficient& xi, double t, double T, const Hurst& h,
                       std::size_t cells) {
  if (T <= 0.0) return 0.0;
  const double p = 2.0 * h.value() - 1.0;
  const PcProfile prof = resample_pc_uniform(xi, T, cells);
  double total = 0.0;
  for (std::size_t j = 0; j < prof.values.size(); ++j) {
    if (prof.values[j] == 0.0) continue;
    const double a = prof.edges[j], b = prof.edges[j + 1];
    total += prof.values[j] * h.value() * (signed_pow(t - a, p) - signed_pow(t - b, p));
  }
  return total;
}

Eigen::VectorXd dh_derivative(const PolynomialFunctional& phi, double t,
                              const fbm::FbmPathBatch& batch) {
  const double T = batch.grid.horizon();
  const MalliavinDerivative d = malliavin_derivative(phi);
  std::vector<double> psi(phi.kernels.size());
  for (std::size_t i = 0; i < phi.kernels.size(); ++i)
    psi[i] = smoothed_kernel(phi.kernels[i], t, T, batch.hurst);
  const Eigen::MatrixXd I = phi.integrals(batch);
  Eigen::VectorXd out(I.rows());
  for (Eigen::Index p = 0; p < I.rows(); ++p) {
    double v = 0.0;
    for (std::size_t i = 0; i < phi.kernels.size(); ++i)
      v += d.partials[i].eval(I.row(p)) * psi[i];
    out(p) = v;
  }
  return out;
}

CheckResult duality_check(const PolynomialFunctional& phi, const Coefficient& u,
                          const fbm::FbmPathBatch& batch) {
  const double T = batch.grid.horizon();
  const Eigen::VectorXd delta_u = fbm::wiener_integral_samples(u, batch);
  const Eigen::MatrixXd I = phi.integrals(batch);
  const MalliavinDerivative d = malliavin_derivative(phi);

  std::vector<double> pairing(phi.kernels.size());
  for (std::size_t i = 0; i < phi.kernels.size(); ++i)
    pairing[i] = kernel::inner_product(phi.kernels[i], u, T, batch.hurst);

  Eigen::VectorXd lhs_s(I.rows()), rhs_s(I.rows());
  for (Eigen::Index p = 0; p < I.rows(); ++p) {
    lhs_s(p) = phi.eval(I.row(p)) * delta_u(p);
    double r = 0.0;
    for (std::size_t i = 0; i < phi.kernels.size(); ++i)
      r += d.partials[i].eval(I.row(p)) * pairing[i];
    rhs_s(p) = r;
  }
  const MeanSe diff = mean_se(lhs_s - rhs_s);
  CheckResult res;
  res.name = "duality";
  res.lhs = lhs_s.mean();
  res.rhs = rhs_s.mean();
  res.se = diff.se;
  res.z = diff.se > 0.0 ? diff.mean / diff.se : 0.0;
  return res;
}

CheckResult isometry_check(const Coefficient& F, const fbm::FbmPathBatch& batch) {
  const double T = batch.grid.horizon();
  const Eigen::VectorXd I = fbm::wiener_integral_samples(F, batch);
  const Eigen::VectorXd sq = I.array().square();
  const MeanSe m = mean_se(sq);
  CheckResult res;
  res.name = "isometry_deterministic";
  res.lhs = m.mean;
  res.rhs = kernel::inner_product(F, F, T, batch.hurst);
  res.se = m.se;
  res.z = m.se > 0.0 ? (res.lhs - res.rhs) / m.se : 0.0;
  return res;
}

double fbm_isometry_rhs(double T, const Hurst& h) {
  const double H = h.value();
  const double p = 2.0 * H - 1.0;

  // E||B||_T^2 = int int phi(u-v) R(u,v) du dv with R the fBm covariance.
  // Symmetrizing the (u^{2H}+v^{2H})/2 part and folding the |u-v|^{2H} part
  // into a single 1-D integrand:
  const auto norm_integrand = [&](double u) {
    const double smoothed = H * (signed_pow(u, p) + signed_pow(T - u, p));
    const double cross = H * p * std::pow(u, 4.0 * H - 1.0) / (4.0 * H - 1.0);
    return std::pow(u, 2.0 * H) * smoothed - cross;
  };
  const double norm_term = adaptive_simpson(norm_integrand, 0.0, T, 1e-11);

  // int int D_s B_t D_t B_s ds dt, symmetric, folded onto {s < t}.
  const auto ds_bt = [&](double s, double t) {
    return H * (signed_pow(s, p) - signed_pow(s - t, p));
  };
  const auto inner = [&](double t) {
    return adaptive_simpson([&](double s) { return ds_bt(s, t) * ds_bt(t, s); }, 0.0, t, 1e-11);
  };
  const double trace_term = 2.0 * adaptive_simpson(inner, 0.0, T, 1e-10);
  return norm_term + trace_term;
}

CheckResult isometry_check_fbm(const fbm::FbmPathBatch& batch) {
  const double T = batch.grid.horizon();
  const double t2h = std::pow(T, 2.0 * batch.hurst.value());
  const Eigen::VectorXd bT = batch.paths.col(batch.paths.cols() - 1);
  const Eigen::VectorXd delta_sq =
      (0.5 * (bT.array().square() - t2h)).square();
  const MeanSe m = mean_se(delta_sq);
  CheckResult res;
  res.name = "isometry_fbm_integrand";
  res.lhs = m.mean;
  res.rhs = fbm_isometry_rhs(T, batch.hurst);
  res.se = m.se;
  res.z = m.se > 0.0 ? (res.lhs - res.rhs) / m.se : 0.0;
  return res;
}

TestFunction TestFunction::square() {
  TestFunction f;
  f.name = "x^2";
  f.value = [](double, double x) { return x * x; };
  f.dt = [](double, double) { return 0.0; };
  f.dx = [](double, double x) { return 2.0 * x; };
  f.dxx = [](double, double) { return 2.0; };
  return f;
}

TestFunction TestFunction::quartic() {
  TestFunction f;
  f.name = "x^4";
  f.value = [](double, double x) { return x * x * x * x; };
  f.dt = [](double, double) { return 0.0; };
  f.dx = [](double, double x) { return 4.0 * x * x * x; };
  f.dxx = [](double, double x) { return 12.0 * x * x; };
  return f;
}

TestFunction TestFunction::cosine() {
  TestFunction f;
  f.name = "cos(x)";
  f.value = [](double, double x) { return std::cos(x); };
  f.dt = [](double, double) { return 0.0; };
  f.dx = [](double, double x) { return -std::sin(x); };
  f.dxx = [](double, double x) { return -std::cos(x); };
  return f;
}

TestFunction TestFunction::polynomial(std::vector<double> coeffs) {
  TestFunction f;
  f.name = "polynomial";
  auto horner = [](const std::vector<double>& c, double x, int drop) {
    double v = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= drop; --k) {
      double factor = c[static_cast<std::size_t>(k)];
      for (int d = 0; d < drop; ++d) factor *= static_cast<double>(k - d);
      v = v * x + factor;
    }
    return v;
  };
  f.value = [coeffs, horner](double, double x) { return horner(coeffs, x, 0); };
  f.dt = [](double, double) { return 0.0; };
  f.dx = [coeffs, horner](double, double x) { return horner(coeffs, x, 1); };
  f.dxx = [coeffs, horner](double, double x) { return horner(coeffs, x, 2); };
  return f;
}

std::vector<CheckResult> ito_mean_check(const TestFunction& F, const ForwardSpec& spec,
                                        const fbm::FbmPathBatch& batch,
                                        const std::vector<std::size_t>& time_indices) {
  const TimeGrid& grid = spec.grid;
  const std::size_t n = grid.size();
  const Eigen::MatrixXd X = forward::simulate_eta(spec, batch);
  const std::vector<GaussianLaw> laws = forward::marginal_profile(spec);
  const GaussHermite gh(48);

  // Deterministic right-hand side: F(0, eta0) plus the cumulative integral of
  // E[F_t + F_x b] dt + (1/2) E[F_xx] d||sigma||_t^2. The diffusion term is
  // integrated against the exact variance-profile increments (sigma_tilde dt
  // = dV); a trapezoid in t would pick up the t^{2H-1} singularity at 0 and
  // fail the tight per-time z gates.
  const std::vector<double> V = kernel::variance_profile(spec.sigma, grid, spec.hurst, 8);
  std::vector<double> drift_part(n), fxx_part(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.points()[k];
    const double bk = spec.b(t);
    drift_part[k] = gh.expect(laws[k], [&](double x) { return F.dt(t, x) + F.dx(t, x) * bk; });
    fxx_part[k] = gh.expect(laws[k], [&](double x) { return F.dxx(t, x); });
  }
  std::vector<double> rhs(n);
  rhs[0] = F.value(0.0, spec.eta0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = grid.points()[k + 1] - grid.points()[k];
    rhs[k + 1] = rhs[k] + 0.5 * dt * (drift_part[k] + drift_part[k + 1]) +
                 0.25 * (fxx_part[k] + fxx_part[k + 1]) * (V[k + 1] - V[k]);
  }

  std::vector<CheckResult> out;
  for (std::size_t k : time_indices) {
    if (k >= n) throw std::out_of_range("ito_mean_check: time index out of range");
    const double t = grid.points()[k];
    Eigen::VectorXd samples(X.rows());
    for (Eigen::Index p = 0; p < X.rows(); ++p)
      samples(p) = F.value(t, X(p, static_cast<Eigen::Index>(k)));
    const MeanSe m = mean_se(samples);
    CheckResult res;
    res.name = "ito_mean[" + F.name + "]@t=" + std::to_string(t);
    res.lhs = m.mean;
    res.rhs = rhs[k];
    res.se = m.se;
    res.z = m.se > 0.0 ? (res.lhs - res.rhs) / m.se : 0.0;
    out.push_back(res);
  }
  return out;
}

std::vector<CheckResult> product_rule_check(const Coefficient& f1, const Coefficient& f2,
                                            const Coefficient& g1, const Coefficient& g2,
                                            const fbm::FbmPathBatch& batch,
                                            const std::vector<std::size_t>& time_indices) {
  const TimeGrid& grid = batch.grid;
  const std::size_t n = grid.size();
  const Eigen::Index n_paths = batch.paths.rows();
  const Hurst& h = batch.hurst;

  // Pathwise left-endpoint realizations X_i = int g_i ds + int f_i dB.
  Eigen::MatrixXd x1 = Eigen::MatrixXd::Zero(n_paths, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd x2 = x1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd db = batch.paths.col(kk + 1) - batch.paths.col(kk);
    const double tk = grid.points()[k];
    x1.col(kk + 1) = x1.col(kk) + f1(tk) * db;
    x2.col(kk + 1) = x2.col(kk) + f2(tk) * db;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    x1.col(kk).array() += forward::drift_integral(g1, grid.points()[k], grid);
    x2.col(kk).array() += forward::drift_integral(g2, grid.points()[k], grid);
  }

  // Deterministic side: d/dt E[X1 X2] = E[X1] g2 + E[X2] g1
  // + sigma_hat(f1) f2 + sigma_hat(f2) f1, integrated per grid cell.
  const auto integrand = [&](double s) {
    const double m1 = forward::drift_integral(g1, s, grid);
    const double m2 = forward::drift_integral(g2, s, grid);
    return m1 * g2(s) + m2 * g1(s) + kernel::sigma_hat(f1, s, h, grid) * f2(s) +
           kernel::sigma_hat(f2, s, h, grid) * f1(s);
  };
  std::vector<double> rhs(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k)
    rhs[k + 1] = rhs[k] + gauss_legendre(integrand, grid.points()[k], grid.points()[k + 1]);

  std::vector<CheckResult> out;
  for (std::size_t k : time_indices) {
    if (k >= n) throw std::out_of_range("product_rule_check: time index out of range");
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd prod = x1.col(kk).cwiseProduct(x2.col(kk));
    const MeanSe m = mean_se(prod);
    CheckResult res;
    res.name = "product_rule@t=" + std::to_string(grid.points()[k]);
    res.lhs = m.mean;
    res.rhs = rhs[k];
    res.se = m.se;
    res.z = m.se > 0.0 ? (res.lhs - res.rhs) / m.se : 0.0;
    out.push_back(res);
  }
  return out;
}

}  // namespace verify
}  // namespace fmbsde
