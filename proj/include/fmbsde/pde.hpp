#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fmbsde/forward.hpp"
#include "fmbsde/quadrature.hpp"

namespace fmbsde {

/// Uniform spatial grid [x_min, x_max] with n_x nodes.
struct SpaceGrid {
  double x_min = -1.0;
  double x_max = 1.0;
  int n_x = 400;

  double dx() const { return (x_max - x_min) / (n_x - 1); }
  double x(int j) const { return x_min + j * dx(); }
  void validate() const {
    if (!(x_min < x_max)) throw std::invalid_argument("SpaceGrid: x_min must be < x_max");
    if (n_x < 8) throw std::invalid_argument("SpaceGrid: n_x must be >= 8");
  }
};

/// [mean range of eta] +- n_sigmas * sup_t ||sigma||_t.
SpaceGrid auto_space_grid(const ForwardSpec& spec, int n_x = 400, double n_sigmas = 6.0);

/// v(t, x) and its spatial derivative on the tensor grid; the discrete
/// Markovian representation Y_t = v(t, eta_t), Z_t = v_x(t, eta_t) sigma_t.
struct ValueSurface {
  TimeGrid grid = TimeGrid::uniform(1.0, 1);
  SpaceGrid space;
  std::vector<double> v;   // n_t * n_x, row-major in time
  std::vector<double> vx;  // centered differences, second-order one-sided at boundaries

  std::size_t n_t() const { return grid.size(); }
  double& at(std::size_t k, int j) { return v[k * space.n_x + j]; }
  double at(std::size_t k, int j) const { return v[k * space.n_x + j]; }

  /// Linear interpolation in x at time index k; clamps outside the grid.
  double value(std::size_t k, double x) const;
  double slope(std::size_t k, double x) const;

  /// v(t, x) = g(x) for every t.
  static ValueSurface constant_in_time(const TimeGrid& grid, const SpaceGrid& space,
                                       const Coefficient& g);

  /// Recomputes vx from v (called by the solver; exposed for constructions).
  void refresh_slopes();
};

void export_surface_csv(const ValueSurface& s, const std::string& path);

/// Driver of the mean-field BSDE: f(t, x, y', z', y, z).
using Driver = std::function<double(double, double, double, double, double, double)>;

/// Non-mean-field driver h(t, x, y, z) obtained by integrating the primed
/// slots of f against a fixed candidate surface and the Gaussian marginal of
/// eta (Gauss-Hermite transplant). Time must be a grid point.
struct FrozenDriver {
  TimeGrid grid = TimeGrid::uniform(1.0, 1);
  std::function<double(std::size_t, double, double, double)> h_at;  // (k, x, y, z)
  double lipschitz_y = 0.0;
  double lipschitz_z = 0.0;

  double operator()(double t, double x, double y, double z) const {
    return h_at(grid.index_of(t), x, y, z);
  }
};

/// Freezes the (y', z') slots: h(t,x,y,z) = sum_i w_i f(t, x, u(t, xi_i),
/// w(t, xi_i), y, z) with quadrature nodes transplanted to the marginal law
/// of eta at t. When freeze_zprime is false the z' slot is frozen the same
/// way but from the candidate's z-surface only (identical here; flag kept for
/// the monotone-iteration variant which passes the same surface).
FrozenDriver freeze_mean_field(const Driver& f, const ValueSurface& surface,
                               const ForwardSpec& spec, int n_quad = 32);

/// Same, with the marginal laws already computed (saves the kernel pass when
/// freezing repeatedly inside Picard iteration).
FrozenDriver freeze_mean_field(const Driver& f, const ValueSurface& surface,
                               const ForwardSpec& spec, const std::vector<GaussianLaw>& laws,
                               int n_quad);

/// Wraps a driver with no (y', z') dependence directly.
FrozenDriver plain_driver(const Driver& f, const TimeGrid& grid);

struct PdeOptions {
  double theta = 0.5;       // theta-scheme weight; 1/2 = Crank-Nicolson
  double sweep_tol = 1e-10; // inner fixed-point tolerance on the driver term
  int max_sweeps = 50;
};

/// Backward solve of v_t + b_t v_x + (1/2) sigma_tilde_t v_xx + h(t,x,v,
/// v_x sigma_t) = 0 with v(T, x) = g(x). Advection/diffusion implicit
/// (banded solve per step), driver by inner fixed-point sweeps. Boundary
/// rows use one-sided second-order stencils (exact on quadratics).
ValueSurface solve_backward_pde(const ForwardSpec& spec, const Coefficient& g,
                                const FrozenDriver& h, const SpaceGrid& space,
                                const PdeOptions& opts = {});

/// Largest dt keeping the explicit part of the theta-scheme nonnegative
/// (monotone) for this spec/space pair.
double monotone_max_dt(const ForwardSpec& spec, const SpaceGrid& space, double theta = 0.5);

/// E[v(t, eta_t)] by the same Gauss-Hermite rule as freeze_mean_field.
double mean_field_expectation(const ValueSurface& surface, const ForwardSpec& spec, double t,
                              int n_quad = 32);

}  // namespace fmbsde
