#include "fmbsde/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fmbsde {
namespace kernel {

double phi(double x, const Hurst& h) {
  if (x == 0.0) throw std::domain_error("phi: singular at x = 0; integrate in closed form instead");
  double H = h.value();
  return H * (2.0 * H - 1.0) * std::pow(std::abs(x), 2.0 * H - 2.0);
}

double cell_mass(double a, double b, double c, double d, const Hurst& h) {
  if (a > b || c > d) throw std::invalid_argument("cell_mass: degenerate-or-reversed rectangle");
  if (a == b || c == d) return 0.0;
  double e = 2.0 * h.value();
  auto p = [e](double x) { return std::pow(std::abs(x), e); };
  return 0.5 * (p(b - c) + p(a - d) - p(a - c) - p(b - d));
}

namespace {

// Compensated (Kahan) accumulator: the cell sums run over millions of terms
// and plain summation alone costs ~1e-12 relative accuracy.
struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// Far-field cell mass: when the rectangles are well separated the closed-form
// second difference cancels catastrophically (four O(1) powers combining to a
// tiny mass), so integrate the smooth phi directly with a 4x4 Gauss-Legendre
// rule instead; its absolute error scales with the (small) mass itself.
double cell_mass_far(double a, double b, double c, double d, const Hurst& h) {
  static const double gl_x[6] = {-0.932469514203152, -0.661209386466265, -0.238619186083197,
                                 0.238619186083197,  0.661209386466265,  0.932469514203152};
  static const double gl_w[6] = {0.171324492379170, 0.360761573048139, 0.467913934572691,
                                 0.467913934572691, 0.360761573048139, 0.171324492379170};
  const double mu = 0.5 * (a + b), ru = 0.5 * (b - a);
  const double mv = 0.5 * (c + d), rv = 0.5 * (d - c);
  double total = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      total += gl_w[i] * gl_w[j] * phi((mu + ru * gl_x[i]) - (mv + rv * gl_x[j]), h);
  return total * ru * rv;
}

// Shared uniform partition detection: enables the O(m) per-offset mass table.
bool shared_uniform(const PcProfile& x, const PcProfile& y, double& dx) {
  if (x.edges.size() != y.edges.size() || x.edges.size() < 2) return false;
  const std::size_t m = x.edges.size() - 1;
  dx = (x.edges.back() - x.edges.front()) / static_cast<double>(m);
  const double tol = 1e-12 * std::max(1.0, std::abs(x.edges.back()));
  for (std::size_t i = 0; i <= m; ++i) {
    const double e = x.edges.front() + static_cast<double>(i) * dx;
    if (std::abs(x.edges[i] - e) > tol || std::abs(y.edges[i] - e) > tol) return false;
  }
  return true;
}

double pc_inner(const PcProfile& x, const PcProfile& y, const Hurst& h) {
  double dx = 0.0;
  if (shared_uniform(x, y, dx)) {
    // Uniform partition: the cell mass depends only on the index offset.
    // Near-diagonal offsets use the closed form (small arguments, no
    // cancellation); far offsets use the quadrature form.
    const std::size_t m = x.values.size();
    std::vector<double> mass(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double c = static_cast<double>(k) * dx;
      mass[k] = (k <= 5) ? cell_mass(0.0, dx, c, c + dx, h)
                         : cell_mass_far(0.0, dx, c, c + dx, h);
    }
    Kahan total;
    for (std::size_t i = 0; i < m; ++i) total.add(x.values[i] * y.values[i] * mass[0]);
    for (std::size_t k = 1; k < m; ++k) {
      double diag = 0.0;
      for (std::size_t i = 0; i + k < m; ++i)
        diag += x.values[i] * y.values[i + k] + x.values[i + k] * y.values[i];
      total.add(diag * mass[k]);
    }
    return total.sum;
  }

  Kahan total;
  for (std::size_t i = 0; i + 1 < x.edges.size(); ++i) {
    if (x.values[i] == 0.0) continue;
    for (std::size_t j = 0; j + 1 < y.edges.size(); ++j) {
      if (y.values[j] == 0.0) continue;
      total.add(x.values[i] * y.values[j] *
                cell_mass(x.edges[i], x.edges[i + 1], y.edges[j], y.edges[j + 1], h));
    }
  }
  return total.sum;
}

// \int_a^b phi(t - v) dv for a <= b <= t, in closed form.
double phi_cell(double t, double a, double b, const Hurst& h) {
  double H = h.value();
  double e = 2.0 * H - 1.0;
  return H * (std::pow(t - a, e) - std::pow(t - b, e));
}

double pc_sigma_hat(const PcProfile& s, double t, const Hurst& h) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.edges.size(); ++i) {
    double a = s.edges[i], b = std::min(s.edges[i + 1], t);
    if (a >= t) break;
    total += s.values[i] * phi_cell(t, a, b, h);
  }
  return total;
}

}  // namespace

double inner_product(const Coefficient& xi, const Coefficient& eta, double t, const Hurst& h,
                     const TimeGrid& grid, int refine) {
  if (!(t > 0.0)) throw std::domain_error("inner_product: t must be positive");
  return pc_inner(resample_pc(xi, t, grid, refine), resample_pc(eta, t, grid, refine), h);
}

double inner_product(const Coefficient& xi, const Coefficient& eta, double t, const Hurst& h,
                     std::size_t m) {
  if (!(t > 0.0)) throw std::domain_error("inner_product: t must be positive");
  return pc_inner(resample_pc_uniform(xi, t, m), resample_pc_uniform(eta, t, m), h);
}

double sigma_hat(const Coefficient& sigma, double t, const Hurst& h, const TimeGrid& grid,
                 int refine) {
  if (t == 0.0) return 0.0;
  if (t < 0.0) throw std::domain_error("sigma_hat: t must be nonnegative");
  return pc_sigma_hat(resample_pc(sigma, t, grid, refine), t, h);
}

double sigma_hat(const Coefficient& sigma, double t, const Hurst& h, std::size_t m) {
  if (t == 0.0) return 0.0;
  if (t < 0.0) throw std::domain_error("sigma_hat: t must be nonnegative");
  return pc_sigma_hat(resample_pc_uniform(sigma, t, m), t, h);
}

double sigma_tilde(const Coefficient& sigma, double t, const Hurst& h, const TimeGrid& grid,
                   int refine, double sigma_min) {
  if (t == 0.0) return 0.0;  // limit: sigma_hat vanishes like t^{2H-1}
  double st = sigma(t);
  if (std::abs(st) < sigma_min)
    throw std::runtime_error("sigma_tilde: |sigma(t)| below sigma_min at t = " + std::to_string(t));
  return 2.0 * sigma_hat(sigma, t, h, grid, refine) * st;
}

std::vector<double> variance_profile(const Coefficient& sigma, const TimeGrid& grid,
                                     const Hurst& h, int refine) {
  const auto& pts = grid.points();
  PcProfile s = resample_pc(sigma, grid.horizon(), grid, refine);
  const std::size_t m = s.values.size();

  std::vector<double> out(pts.size(), 0.0);
  // Cumulative double sum over the refined cells; record the running value
  // whenever a cell edge coincides with a grid point.
  Kahan running;
  std::size_t next_grid = 1;
  double slack = 1e-12 * grid.horizon();
  for (std::size_t q = 0; q < m; ++q) {
    const double c = s.edges[q], d = s.edges[q + 1];
    for (std::size_t p = 0; p < q; ++p)
      running.add(2.0 * s.values[p] * s.values[q] *
                  cell_mass(s.edges[p], s.edges[p + 1], c, d, h));
    running.add(s.values[q] * s.values[q] * cell_mass(c, d, c, d, h));
    while (next_grid < pts.size() && s.edges[q + 1] >= pts[next_grid] - slack) {
      out[next_grid] = running.sum;
      ++next_grid;
    }
  }
  return out;
}

RatioBoundReport ratio_bound_report(const Coefficient& sigma, const TimeGrid& grid, const Hurst& h,
                                    int refine, double sigma_min) {
  const auto& pts = grid.points();
  double sign = 0.0;
  RatioBoundReport rep;
  double e = 2.0 * h.value() - 1.0;
  double M = 1.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    double t = pts[k];
    double st = sigma(t);
    if (std::abs(st) < sigma_min)
      throw std::runtime_error("ratio_bound_report: sigma below sigma_min on the grid");
    double s = st > 0 ? 1.0 : -1.0;
    if (sign == 0.0) sign = s;
    if (s != sign) throw std::runtime_error("ratio_bound_report: sigma changes sign on the grid");
    double ratio = sigma_hat(sigma, t, h, grid, refine) / st;
    double rel = ratio / std::pow(t, e);
    if (!(rel > 0.0))
      throw std::runtime_error("ratio_bound_report: nonpositive ratio at t = " + std::to_string(t));
    M = std::max({M, rel, 1.0 / rel});
    rep.times.push_back(t);
    rep.ratios.push_back(ratio);
  }
  rep.M = M;
  return rep;
}

void check_sign_definite(const Coefficient& sigma, const TimeGrid& grid, double sigma_min) {
  PcProfile s = resample_pc(sigma, grid.horizon(), grid, 8);
  double sign = 0.0;
  for (double v : s.values) {
    if (std::abs(v) < sigma_min)
      throw std::runtime_error("sigma must satisfy |sigma| >= sigma_min on the grid");
    double sg = v > 0 ? 1.0 : -1.0;
    if (sign == 0.0) sign = sg;
    if (sg != sign) throw std::runtime_error("sigma must not change sign on the grid");
  }
}

}  // namespace kernel
}  // namespace fmbsde
