#include "fmbsde/mfbsde.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fmbsde {

namespace {

std::vector<double> make_z_surface(const ValueSurface& s, const ForwardSpec& spec) {
  std::vector<double> w(s.vx.size());
  const auto& pts = s.grid.points();
  for (std::size_t k = 0; k < s.n_t(); ++k) {
    double sig = spec.sigma(pts[k]);
    for (int j = 0; j < s.space.n_x; ++j)
      w[k * s.space.n_x + j] = s.vx[k * s.space.n_x + j] * sig;
  }
  return w;
}

// int_a^b e^{beta t} dt, stable for small beta.
double exp_cell(double a, double b, double beta) {
  if (std::abs(beta) < 1e-12) return b - a;
  return (std::exp(beta * b) - std::exp(beta * a)) / beta;
}

double surface_diff_second_moment(const ValueSurface& u1, const ValueSurface& u2, std::size_t k,
                                  const GaussianLaw& law, const GaussHermite& gh) {
  return gh.expect(law, [&](double x) {
    double d = u1.value(k, x) - u2.value(k, x);
    return d * d;
  });
}

double z_interp(const std::vector<double>& w, const ValueSurface& s, std::size_t k, double x) {
  const double dx = s.space.dx();
  double u = (x - s.space.x_min) / dx;
  const double* row = w.data() + k * s.space.n_x;
  if (u <= 0.0) return row[0];
  if (u >= s.space.n_x - 1) return row[s.space.n_x - 1];
  int j = static_cast<int>(u);
  double t = u - j;
  return row[j] * (1.0 - t) + row[j + 1] * t;
}

}  // namespace

double IterationDistance::combined() const { return std::sqrt(dY * dY + dZ * dZ); }

double MfBsdeSolution::z_value(std::size_t k, double x) const {
  return z_interp(z_surface, surface, k, x);
}

LipschitzAudit audit_lipschitz(const MfBsdeProblem& p, double box_half_width, int n_samples,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(-box_half_width, box_half_width);
  std::uniform_real_distribution<double> ut(0.0, p.spec.grid.horizon());
  const double eps = 1e-5 * box_half_width;
  LipschitzAudit a;
  for (int i = 0; i < n_samples; ++i) {
    double t = ut(rng), x = ub(rng), yp = ub(rng), zp = ub(rng), y = ub(rng), z = ub(rng);
    auto slope = [&](int arg) {
      double args[4] = {yp, zp, y, z};
      args[arg] += eps;
      double hi = p.f(t, x, args[0], args[1], args[2], args[3]);
      args[arg] -= 2.0 * eps;
      double lo = p.f(t, x, args[0], args[1], args[2], args[3]);
      return std::abs(hi - lo) / (2.0 * eps);
    };
    a.max_slope_yp = std::max(a.max_slope_yp, slope(0));
    a.max_slope_zp = std::max(a.max_slope_zp, slope(1));
    a.max_slope_y = std::max(a.max_slope_y, slope(2));
    a.max_slope_z = std::max(a.max_slope_z, slope(3));
  }
  double worst = std::max({a.max_slope_yp, a.max_slope_zp, a.max_slope_y, a.max_slope_z});
  a.within_declared = worst <= 1.05 * p.lipschitz_C;
  return a;
}

IterationDistance weighted_distance(const ValueSurface& u1, const std::vector<double>& w1,
                                    const ValueSurface& u2, const std::vector<double>& w2,
                                    const ForwardSpec& spec, double beta,
                                    const std::vector<GaussianLaw>& laws, int n_quad) {
  if (u1.grid.points() != u2.grid.points())
    throw std::invalid_argument("weighted_distance: surfaces on different grids");
  GaussHermite gh(n_quad);
  const auto& pts = u1.grid.points();
  const double zexp = 2.0 * spec.hurst.value() - 1.0;
  double dY2 = 0.0, dZ2 = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double Ey = surface_diff_second_moment(u1, u2, k, laws[k], gh);
    double Ez = gh.expect(laws[k], [&](double x) {
      double d = z_interp(w1, u1, k, x) - z_interp(w2, u2, k, x);
      return d * d;
    });
    dY2 += Ey * exp_cell(pts[k], pts[k + 1], beta);
    dZ2 += Ez * gauss_legendre(
                    [&](double t) { return std::pow(t, zexp) * std::exp(beta * t); }, pts[k],
                    pts[k + 1]);
  }
  return {std::sqrt(dY2), std::sqrt(dZ2)};
}

MfBsdeSolution picard_solve(const MfBsdeProblem& p, const SolveOptions& opts) {
  p.spec.validate();
  SpaceGrid space = opts.space ? *opts.space : auto_space_grid(p.spec, opts.n_x);
  auto laws = forward::marginal_profile(p.spec);

  MfBsdeSolution sol;
  sol.M_used = kernel::ratio_bound_report(p.spec.sigma, p.spec.grid, p.spec.hurst).M;
  sol.beta_used =
      opts.beta ? *opts.beta
                : 16.0 * sol.M_used * p.lipschitz_C * p.lipschitz_C + 4.0 / sol.M_used;

  if (!p.mean_field_dependent) {
    // Eq.-style reduction: the primed slots are inert, one PDE solve suffices.
    sol.surface = solve_backward_pde(p.spec, p.g, plain_driver(p.f, p.spec.grid), space, opts.pde);
    sol.z_surface = make_z_surface(sol.surface, p.spec);
    sol.iterations = 1;
    return sol;
  }

  ValueSurface current = ValueSurface::constant_in_time(p.spec.grid, space, p.g);
  std::vector<double> current_z = make_z_surface(current, p.spec);
  int stall = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    FrozenDriver frozen = freeze_mean_field(p.f, current, p.spec, laws, opts.n_quad);
    ValueSurface next = solve_backward_pde(p.spec, p.g, frozen, space, opts.pde);
    std::vector<double> next_z = make_z_surface(next, p.spec);
    IterationDistance d = weighted_distance(next, next_z, current, current_z, p.spec,
                                            sol.beta_used, laws, opts.n_quad);
    sol.distances.push_back(d);
    sol.iterations = it;
    current = std::move(next);
    current_z = std::move(next_z);
    if (d.combined() < opts.tol) {
      sol.surface = std::move(current);
      sol.z_surface = std::move(current_z);
      return sol;
    }
    if (sol.distances.size() >= 2) {
      double prev = sol.distances[sol.distances.size() - 2].combined();
      stall = (prev > 0.0 && d.combined() >= prev) ? stall + 1 : 0;
      if (stall >= 3)
        throw std::runtime_error(
            "picard_solve: no contraction for 3 consecutive iterations; the declared Lipschitz "
            "constant (and hence beta) is likely misconfigured");
    }
  }
  std::ostringstream msg;
  msg << "picard_solve: max_iter exceeded; distance trace:";
  for (const auto& d : sol.distances) msg << ' ' << d.combined();
  throw std::runtime_error(msg.str());
}

ContractionReport contraction_report(const MfBsdeSolution& sol) {
  ContractionReport rep;
  for (std::size_t k = 0; k + 1 < sol.distances.size(); ++k) {
    double d0 = sol.distances[k].combined();
    double r = d0 > 0.0 ? sol.distances[k + 1].combined() / d0 : 0.0;
    rep.ratios.push_back(r);
    rep.flagged.push_back(k + 1 >= 2 && r > 0.6);
  }
  return rep;
}

AprioriReport apriori_check(const MfBsdeProblem& p, const MfBsdeSolution& sol, int n_quad) {
  const auto& pts = p.spec.grid.points();
  const std::size_t n = pts.size();
  GaussHermite gh(n_quad);
  auto laws = forward::marginal_profile(p.spec);
  const double beta = sol.beta_used;
  const double zexp = 2.0 * p.spec.hurst.value() - 1.0;

  // Per-time second moments of Y, Z and of f0(s, eta_s).
  std::vector<double> Ey2(n), Ez2(n), Ef02(n);
  for (std::size_t k = 0; k < n; ++k) {
    Ey2[k] = gh.expect(laws[k], [&](double x) {
      double y = sol.surface.value(k, x);
      return y * y;
    });
    Ez2[k] = gh.expect(laws[k], [&](double x) {
      double z = sol.z_value(k, x);
      return z * z;
    });
    Ef02[k] = gh.expect(laws[k], [&](double x) {
      double f0 = p.f(pts[k], x, 0.0, 0.0, 0.0, 0.0);
      return f0 * f0;
    });
  }
  double Eg2 = gh.expect(laws[n - 1], [&](double x) {
    double g = p.g(x);
    return g * g;
  });

  AprioriReport rep;
  rep.times.assign(pts.begin(), pts.end());
  rep.lhs.resize(n);
  rep.theta.resize(n);
  // Tail integrals accumulated backward.
  double z_tail = 0.0, f_tail = 0.0;
  rep.lhs[n - 1] = std::exp(beta * pts[n - 1]) * Ey2[n - 1];
  rep.theta[n - 1] = std::exp(beta * pts[n - 1]) * Eg2;
  for (std::size_t k = n - 1; k-- > 0;) {
    double wz = gauss_legendre(
        [&](double t) { return std::pow(t, zexp) * std::exp(beta * t); }, pts[k], pts[k + 1]);
    double wf = exp_cell(pts[k], pts[k + 1], beta);
    z_tail += Ez2[k] * wz;
    f_tail += Ef02[k] * wf;
    rep.lhs[k] = std::exp(beta * pts[k]) * Ey2[k] + z_tail;
    rep.theta[k] = std::exp(beta * pts[n - 1]) * Eg2 + f_tail;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (rep.theta[k] <= 1e-300) {
      if (rep.lhs[k] > 1e-12) rep.inconsistent = true;
      continue;
    }
    double r = rep.lhs[k] / rep.theta[k];
    if (!std::isfinite(r)) rep.finite = false;
    rep.sup_ratio = std::max(rep.sup_ratio, r);
  }
  return rep;
}

ResidualReport discrete_residual(const MfBsdeProblem& p, const MfBsdeSolution& sol,
                                 const fbm::FbmPathBatch& batch) {
  if (batch.grid.points() != p.spec.grid.points())
    throw std::invalid_argument("discrete_residual: batch grid differs from problem grid");
  Eigen::MatrixXd eta = forward::simulate_eta(p.spec, batch);
  FrozenDriver h = p.mean_field_dependent
                       ? freeze_mean_field(p.f, sol.surface, p.spec, 32)
                       : plain_driver(p.f, p.spec.grid);
  const auto& pts = p.spec.grid.points();
  const std::size_t n_steps = pts.size() - 1;
  const Eigen::Index np = batch.paths.rows();

  ResidualReport rep;
  rep.mean.assign(n_steps, 0.0);
  rep.rms.assign(n_steps, 0.0);
  double total_sq = 0.0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    double dt = pts[k + 1] - pts[k];
    double acc = 0.0, acc2 = 0.0;
    for (Eigen::Index pth = 0; pth < np; ++pth) {
      double xk = eta(pth, static_cast<Eigen::Index>(k));
      double xk1 = eta(pth, static_cast<Eigen::Index>(k + 1));
      double y = sol.surface.value(k, xk);
      double y1 = sol.surface.value(k + 1, xk1);
      double z = sol.z_value(k, xk);
      double db = batch.paths(pth, static_cast<Eigen::Index>(k + 1)) -
                  batch.paths(pth, static_cast<Eigen::Index>(k));
      double r = y - y1 - h.h_at(k, xk, y, z) * dt + z * db;
      acc += r;
      acc2 += r * r;
    }
    rep.mean[k] = acc / static_cast<double>(np);
    rep.rms[k] = std::sqrt(acc2 / static_cast<double>(np));
    total_sq += acc2;
  }
  rep.overall_rms = std::sqrt(total_sq / static_cast<double>(np * static_cast<Eigen::Index>(n_steps)));
  return rep;
}

ComparisonVerdict compare_solutions(const MfBsdeProblem& p1, const MfBsdeProblem& p2, double tol,
                                    const SolveOptions& opts) {
  // Sampled precondition checks: f1 <= f2, g1 <= g2, f1 increasing in y'.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.0, p1.spec.grid.horizon());
  std::uniform_real_distribution<double> ub(-10.0, 10.0);
  const double eps = 1e-5;
  for (int i = 0; i < 10000; ++i) {
    double t = ut(rng), x = ub(rng), yp = ub(rng), y = ub(rng), z = ub(rng);
    double a = p1.f(t, x, yp, 0.0, y, z), b = p2.f(t, x, yp, 0.0, y, z);
    if (a > b + 1e-9) {
      std::ostringstream msg;
      msg << "compare_solutions: f1 > f2 at (t,x,y',y,z) = (" << t << ',' << x << ',' << yp << ','
          << y << ',' << z << ')';
      throw std::invalid_argument(msg.str());
    }
    double up = p1.f(t, x, yp + eps, 0.0, y, z), dn = p1.f(t, x, yp - eps, 0.0, y, z);
    if (up - dn < -1e-9) {
      std::ostringstream msg;
      msg << "compare_solutions: f1 not increasing in y' at (t,x,y',y,z) = (" << t << ',' << x
          << ',' << yp << ',' << y << ',' << z << ')';
      throw std::invalid_argument(msg.str());
    }
  }
  for (int i = 0; i < 10000; ++i) {
    double x = ub(rng);
    if (p1.g(x) > p2.g(x) + 1e-9)
      throw std::invalid_argument("compare_solutions: g1 > g2 at x = " + std::to_string(x));
  }
  if (!p1.monotone_in_yprime)
    throw std::invalid_argument("compare_solutions: p1 must declare monotone_in_yprime");

  ComparisonVerdict v;
  // Shared space grid keeps the pointwise comparison meaningful.
  SolveOptions o = opts;
  if (!o.space) {
    SpaceGrid s1 = auto_space_grid(p1.spec, o.n_x);
    SpaceGrid s2 = auto_space_grid(p2.spec, o.n_x);
    o.space = SpaceGrid{std::min(s1.x_min, s2.x_min), std::max(s1.x_max, s2.x_max), o.n_x};
  }
  v.first = picard_solve(p1, o);
  v.second = picard_solve(p2, o);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.first.surface.v.size(); ++i)
    worst = std::max(worst, v.first.surface.v[i] - v.second.surface.v[i]);
  v.max_violation = worst;
  v.ordered = worst <= tol;
  return v;
}

MfBsdeSolution monotone_iteration_solve(const MfBsdeProblem& p, const MfBsdeSolution& start,
                                        MonotoneTrace* trace, const SolveOptions& opts) {
  if (!p.monotone_in_yprime)
    throw std::invalid_argument("monotone_iteration_solve: problem must be monotone in y'");
  p.spec.validate();
  auto laws = forward::marginal_profile(p.spec);
  SpaceGrid space = start.surface.space;

  MfBsdeSolution sol;
  sol.M_used = kernel::ratio_bound_report(p.spec.sigma, p.spec.grid, p.spec.hurst).M;
  sol.beta_used = 12.0 * sol.M_used * p.lipschitz_C * p.lipschitz_C + 4.0 / sol.M_used;

  ValueSurface current = start.surface;
  std::vector<double> current_z = start.z_surface;
  for (int it = 1; it <= opts.max_iter; ++it) {
    FrozenDriver frozen = freeze_mean_field(p.f, current, p.spec, laws, opts.n_quad);
    ValueSurface next = solve_backward_pde(p.spec, p.g, frozen, space, opts.pde);
    std::vector<double> next_z = make_z_surface(next, p.spec);
    double max_inc = -std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (std::size_t i = 0; i < next.v.size(); ++i) {
      max_inc = std::max(max_inc, next.v[i] - current.v[i]);
      max_abs = std::max(max_abs, std::abs(next.v[i] - current.v[i]));
    }
    if (trace) trace->max_increase.push_back(max_inc);
    IterationDistance d = weighted_distance(next, next_z, current, current_z, p.spec,
                                            sol.beta_used, laws, opts.n_quad);
    sol.distances.push_back(d);
    sol.iterations = it;
    // Supersolution start: iterates must not increase.
    if (max_inc > 100.0 * opts.tol) {
      std::ostringstream msg;
      msg << "monotone_iteration_solve: monotonicity violated by " << max_inc << " at iteration "
          << it;
      throw std::runtime_error(msg.str());
    }
    current = std::move(next);
    current_z = std::move(next_z);
    if (max_abs < opts.tol) break;
  }
  sol.surface = std::move(current);
  sol.z_surface = std::move(current_z);
  return sol;
}

std::string diagnostics_json(const MfBsdeSolution& sol, const ResidualReport* residuals) {
  nlohmann::json j;
  j["iterations"] = sol.iterations;
  j["beta_used"] = sol.beta_used;
  j["M_used"] = sol.M_used;
  j["distances"] = nlohmann::json::array();
  for (const auto& d : sol.distances)
    j["distances"].push_back({{"dY", d.dY}, {"dZ", d.dZ}, {"combined", d.combined()}});
  auto rep = contraction_report(sol);
  j["contraction_ratios"] = rep.ratios;
  if (residuals) {
    j["residual"] = {{"overall_rms", residuals->overall_rms},
                     {"per_step_mean", residuals->mean},
                     {"per_step_rms", residuals->rms}};
  }
  return j.dump(2);
}

}  // namespace fmbsde
