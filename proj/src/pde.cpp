#include "fmbsde/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "fmbsde/csv.hpp"

namespace fmbsde {

SpaceGrid auto_space_grid(const ForwardSpec& spec, int n_x, double n_sigmas) {
  auto laws = forward::marginal_profile(spec);
  double mean_lo = laws.front().mean, mean_hi = laws.front().mean, var_max = 0.0;
  for (const auto& law : laws) {
    mean_lo = std::min(mean_lo, law.mean);
    mean_hi = std::max(mean_hi, law.mean);
    var_max = std::max(var_max, law.variance);
  }
  double s = std::sqrt(var_max);
  if (s == 0.0) s = 1.0;
  SpaceGrid g{mean_lo - n_sigmas * s, mean_hi + n_sigmas * s, n_x};
  g.validate();
  return g;
}

double ValueSurface::value(std::size_t k, double x) const {
  const double dx = space.dx();
  double u = (x - space.x_min) / dx;
  if (u <= 0.0) return at(k, 0);
  if (u >= space.n_x - 1) return at(k, space.n_x - 1);
  int j = static_cast<int>(u);
  double w = u - j;
  return at(k, j) * (1.0 - w) + at(k, j + 1) * w;
}

double ValueSurface::slope(std::size_t k, double x) const {
  const double dx = space.dx();
  double u = (x - space.x_min) / dx;
  const double* row = vx.data() + k * space.n_x;
  if (u <= 0.0) return row[0];
  if (u >= space.n_x - 1) return row[space.n_x - 1];
  int j = static_cast<int>(u);
  double w = u - j;
  return row[j] * (1.0 - w) + row[j + 1] * w;
}

void ValueSurface::refresh_slopes() {
  const int nx = space.n_x;
  const double dx = space.dx();
  vx.resize(v.size());
  for (std::size_t k = 0; k < n_t(); ++k) {
    const double* row = v.data() + k * nx;
    double* d = vx.data() + k * nx;
    d[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * dx);
    for (int j = 1; j + 1 < nx; ++j) d[j] = (row[j + 1] - row[j - 1]) / (2.0 * dx);
    d[nx - 1] = (3.0 * row[nx - 1] - 4.0 * row[nx - 2] + row[nx - 3]) / (2.0 * dx);
  }
}

ValueSurface ValueSurface::constant_in_time(const TimeGrid& grid, const SpaceGrid& space,
                                            const Coefficient& g) {
  ValueSurface s;
  s.grid = grid;
  s.space = space;
  s.v.resize(grid.size() * space.n_x);
  for (int j = 0; j < space.n_x; ++j) s.v[j] = g(space.x(j));
  for (std::size_t k = 1; k < grid.size(); ++k)
    std::copy(s.v.begin(), s.v.begin() + space.n_x, s.v.begin() + k * space.n_x);
  s.refresh_slopes();
  return s;
}

void export_surface_csv(const ValueSurface& s, const std::string& path) {
  CsvTable table;
  table.header = {"t", "x", "v", "vx"};
  table.rows.reserve(s.n_t() * s.space.n_x);
  for (std::size_t k = 0; k < s.n_t(); ++k)
    for (int j = 0; j < s.space.n_x; ++j)
      table.rows.push_back({s.grid[k], s.space.x(j), s.at(k, j), s.vx[k * s.space.n_x + j]});
  write_csv(table, path);
}

FrozenDriver freeze_mean_field(const Driver& f, const ValueSurface& surface,
                               const ForwardSpec& spec, int n_quad) {
  return freeze_mean_field(f, surface, spec, forward::marginal_profile(spec), n_quad);
}

FrozenDriver freeze_mean_field(const Driver& f, const ValueSurface& surface,
                               const ForwardSpec& spec, const std::vector<GaussianLaw>& laws,
                               int n_quad) {
  if (n_quad < 4) throw std::invalid_argument("freeze_mean_field: n_quad must be >= 4");
  if (surface.grid.points() != spec.grid.points())
    throw std::invalid_argument("freeze_mean_field: surface grid differs from spec grid");
  GaussHermite gh(n_quad);
  const std::size_t n_t = spec.grid.size();
  const auto& pts = spec.grid.points();

  // Pre-evaluate the candidate (y', z') node values per time slice.
  auto u_nodes = std::make_shared<std::vector<double>>(n_t * n_quad);
  auto w_nodes = std::make_shared<std::vector<double>>(n_t * n_quad);
  auto weights = std::make_shared<std::vector<double>>(gh.weights);
  for (std::size_t k = 0; k < n_t; ++k) {
    double s = std::sqrt(std::max(0.0, laws[k].variance));
    double sig = spec.sigma(pts[k]);
    for (int i = 0; i < n_quad; ++i) {
      double xi = laws[k].mean + s * gh.nodes[i];  // clamped inside value()/slope()
      (*u_nodes)[k * n_quad + i] = surface.value(k, xi);
      (*w_nodes)[k * n_quad + i] = surface.slope(k, xi) * sig;
    }
  }

  FrozenDriver out;
  out.grid = spec.grid;
  auto times = std::make_shared<std::vector<double>>(pts);
  out.h_at = [f, u_nodes, w_nodes, weights, times, n_quad](std::size_t k, double x, double y,
                                                           double z) {
    double total = 0.0;
    const double t = (*times)[k];
    for (int i = 0; i < n_quad; ++i)
      total += (*weights)[i] * f(t, x, (*u_nodes)[k * n_quad + i], (*w_nodes)[k * n_quad + i], y, z);
    return total;
  };
  return out;
}

FrozenDriver plain_driver(const Driver& f, const TimeGrid& grid) {
  FrozenDriver out;
  out.grid = grid;
  auto times = std::make_shared<std::vector<double>>(grid.points());
  out.h_at = [f, times](std::size_t k, double x, double y, double z) {
    return f((*times)[k], x, 0.0, 0.0, y, z);
  };
  return out;
}

namespace {

// One time level's spatial operator A v = b v_x + (1/2) sigt v_xx with
// second-order one-sided stencils on the boundary rows.
struct Stencil {
  double adv;   // b_k
  double dif;   // sigt_k / 2
  double dx;

  void apply(const double* v, double* out, int nx) const {
    const double cx = adv / (2.0 * dx), cxx = dif / (dx * dx);
    out[0] = cx * (-3.0 * v[0] + 4.0 * v[1] - v[2]) + cxx * (v[0] - 2.0 * v[1] + v[2]);
    for (int j = 1; j + 1 < nx; ++j)
      out[j] = cx * (v[j + 1] - v[j - 1]) + cxx * (v[j + 1] - 2.0 * v[j] + v[j - 1]);
    out[nx - 1] = cx * (3.0 * v[nx - 1] - 4.0 * v[nx - 2] + v[nx - 3]) +
                  cxx * (v[nx - 1] - 2.0 * v[nx - 2] + v[nx - 3]);
  }
};

// Solves (I - c A) v = rhs where A is the stencil above: tridiagonal plus one
// extra entry in each boundary row, removed by a single elimination step.
void solve_implicit(const Stencil& st, double c, std::vector<double>& lo, std::vector<double>& di,
                    std::vector<double>& up, std::vector<double>& rhs, double* v, int nx) {
  const double cx = st.adv / (2.0 * st.dx), cxx = st.dif / (st.dx * st.dx);
  // Interior rows of I - cA.
  for (int j = 1; j + 1 < nx; ++j) {
    lo[j] = -c * (-cx + cxx);
    di[j] = 1.0 - c * (-2.0 * cxx);
    up[j] = -c * (cx + cxx);
  }
  // Boundary rows: nodes (0,1,2) and (nx-1, nx-2, nx-3).
  double a00 = 1.0 - c * (-3.0 * cx + cxx);
  double a01 = -c * (4.0 * cx - 2.0 * cxx);
  double a02 = -c * (-cx + cxx);
  double b00 = 1.0 - c * (3.0 * cx + cxx);
  double b01 = -c * (-4.0 * cx - 2.0 * cxx);
  double b02 = -c * (cx + cxx);
  double r0 = rhs[0], rn = rhs[nx - 1];
  if (a02 != 0.0) {
    if (up[1] == 0.0) throw std::runtime_error("pde: boundary elimination failed (zero pivot)");
    double f = a02 / up[1];
    a00 -= f * lo[1];
    a01 -= f * di[1];
    r0 -= f * rhs[1];
  }
  if (b02 != 0.0) {
    if (lo[nx - 2] == 0.0) throw std::runtime_error("pde: boundary elimination failed (zero pivot)");
    double f = b02 / lo[nx - 2];
    b01 -= f * di[nx - 2];
    b00 -= f * up[nx - 2];
    rn -= f * rhs[nx - 2];
  }
  di[0] = a00;
  up[0] = a01;
  rhs[0] = r0;
  di[nx - 1] = b00;
  lo[nx - 1] = b01;
  rhs[nx - 1] = rn;
  // Thomas sweep.
  for (int j = 1; j < nx; ++j) {
    double m = lo[j] / di[j - 1];
    di[j] -= m * up[j - 1];
    rhs[j] -= m * rhs[j - 1];
  }
  v[nx - 1] = rhs[nx - 1] / di[nx - 1];
  for (int j = nx - 2; j >= 0; --j) v[j] = (rhs[j] - up[j] * v[j + 1]) / di[j];
}

}  // namespace

ValueSurface solve_backward_pde(const ForwardSpec& spec, const Coefficient& g,
                                const FrozenDriver& h, const SpaceGrid& space,
                                const PdeOptions& opts) {
  space.validate();
  const auto& pts = spec.grid.points();
  const std::size_t n_t = pts.size();
  const int nx = space.n_x;
  const double dx = space.dx();
  const double theta = opts.theta;

  std::vector<double> b_k(n_t), sig_k(n_t);
  for (std::size_t k = 0; k < n_t; ++k) {
    b_k[k] = spec.b(pts[k]);
    sig_k[k] = spec.sigma(pts[k]);
  }
  // Effective diffusion per step: the exact increment of the variance profile
  // ||sigma||_t^2 divided by dt. Pointwise sigma_tilde under trapezoidal
  // weighting loses accuracy near t = 0 where sigma_tilde ~ t^{2H-1}; the
  // increment form integrates it exactly and keeps the scheme exact on
  // quadratic data.
  const std::vector<double> var_k = kernel::variance_profile(spec.sigma, spec.grid, spec.hurst, 8);

  ValueSurface s;
  s.grid = spec.grid;
  s.space = space;
  s.v.resize(n_t * nx);
  for (int j = 0; j < nx; ++j) s.at(n_t - 1, j) = g(space.x(j));  // terminal, exact

  std::vector<double> lo(nx), di(nx), up(nx), rhs(nx), base(nx), Av(nx), w(nx), wx(nx),
      vnew(nx);
  for (std::size_t k = n_t - 1; k-- > 0;) {
    const double dt = pts[k + 1] - pts[k];
    const double* vnext = s.v.data() + (k + 1) * nx;
    const double half_eff = 0.5 * (var_k[k + 1] - var_k[k]) / dt;
    Stencil st_next{b_k[k + 1], half_eff, dx};
    Stencil st_cur{b_k[k], half_eff, dx};

    // Explicit portion plus the driver evaluated at the next time level.
    st_next.apply(vnext, Av.data(), nx);
    wx.assign(vnext, vnext + nx);
    // slopes of vnext
    std::vector<double> dnext(nx);
    dnext[0] = (-3.0 * vnext[0] + 4.0 * vnext[1] - vnext[2]) / (2.0 * dx);
    for (int j = 1; j + 1 < nx; ++j) dnext[j] = (vnext[j + 1] - vnext[j - 1]) / (2.0 * dx);
    dnext[nx - 1] = (3.0 * vnext[nx - 1] - 4.0 * vnext[nx - 2] + vnext[nx - 3]) / (2.0 * dx);
    for (int j = 0; j < nx; ++j)
      base[j] = vnext[j] + (1.0 - theta) * dt * Av[j] +
                (1.0 - theta) * dt * h.h_at(k + 1, space.x(j), vnext[j], dnext[j] * sig_k[k + 1]);

    // Inner fixed point on the implicit driver term.
    w.assign(vnext, vnext + nx);
    bool converged = false;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      wx[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx);
      for (int j = 1; j + 1 < nx; ++j) wx[j] = (w[j + 1] - w[j - 1]) / (2.0 * dx);
      wx[nx - 1] = (3.0 * w[nx - 1] - 4.0 * w[nx - 2] + w[nx - 3]) / (2.0 * dx);
      for (int j = 0; j < nx; ++j)
        rhs[j] = base[j] + theta * dt * h.h_at(k, space.x(j), w[j], wx[j] * sig_k[k]);
      solve_implicit(st_cur, theta * dt, lo, di, up, rhs, vnew.data(), nx);
      double delta = 0.0;
      for (int j = 0; j < nx; ++j) delta = std::max(delta, std::abs(vnew[j] - w[j]));
      w = vnew;
      if (delta < opts.sweep_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error(
          "solve_backward_pde: inner driver sweep failed to converge at t = " +
          std::to_string(pts[k]) + "; check the driver's Lipschitz constants against dt");
    std::copy(w.begin(), w.end(), s.v.begin() + k * nx);
  }
  s.refresh_slopes();
  return s;
}

double monotone_max_dt(const ForwardSpec& spec, const SpaceGrid& space, double theta) {
  if (theta >= 1.0) return std::numeric_limits<double>::infinity();
  const auto& pts = spec.grid.points();
  double sigt_max = 0.0;
  for (double t : pts)
    sigt_max = std::max(sigt_max,
                        kernel::sigma_tilde(spec.sigma, t, spec.hurst, spec.grid, 8,
                                            spec.sigma_min));
  if (sigt_max == 0.0) return std::numeric_limits<double>::infinity();
  double dx = space.dx();
  return dx * dx / ((1.0 - theta) * sigt_max);
}

double mean_field_expectation(const ValueSurface& surface, const ForwardSpec& spec, double t,
                              int n_quad) {
  std::size_t k = surface.grid.index_of(t);
  GaussianLaw law = forward::eta_marginal(spec, surface.grid[k]);
  GaussHermite gh(n_quad);
  return gh.expect(law, [&](double x) { return surface.value(k, x); });
}

}  // namespace fmbsde
