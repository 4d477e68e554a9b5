#include "fmbsde/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace fmbsde {

GaussHermite::GaussHermite(int n) {
  if (n < 1) throw std::invalid_argument("GaussHermite: order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the (probabilists') Hermite
  // recurrence: off-diagonal sqrt(i).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // first-moment normalization: weights sum to 1
  }
}

double GaussHermite::expect(const GaussianLaw& law, const std::function<double(double)>& g) const {
  if (law.variance < 0.0) throw std::invalid_argument("GaussianLaw variance must be >= 0");
  double s = std::sqrt(law.variance);
  if (s == 0.0) return g(law.mean);
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) total += weights[i] * g(law.mean + s * nodes[i]);
  return total;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int order) {
  // Nodes/weights on [-1, 1] for orders 5 (default) via Golub-Welsch.
  static thread_local int cached_order = -1;
  static thread_local std::vector<double> xs, ws;
  if (order != cached_order) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
      double c = static_cast<double>(i) / std::sqrt(4.0 * i * i - 1.0);
      J(i, i - 1) = J(i - 1, i) = c;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    xs.resize(order);
    ws.resize(order);
    for (int i = 0; i < order; ++i) {
      xs[i] = es.eigenvalues()(i);
      double v0 = es.eigenvectors()(0, i);
      ws[i] = 2.0 * v0 * v0;
    }
    cached_order = order;
  }
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double total = 0.0;
  for (int i = 0; i < order; ++i) total += ws[i] * f(mid + half * xs[i]);
  return half * total;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b, double fb,
             double fm, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, flm);
  double right = simpson(f, m, fm, b, fb, frm);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adapt(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson(f, a, fa, b, fb, fm);
  return adapt(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

}  // namespace fmbsde
