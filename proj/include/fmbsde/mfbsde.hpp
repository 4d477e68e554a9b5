#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmbsde/pde.hpp"

namespace fmbsde {

/// Full datum of the mean-field BSDE: forward spec, driver f(t,x,y',z',y,z),
/// terminal g(eta_T), and Lipschitz metadata.
struct MfBsdeProblem {
  ForwardSpec spec;
  Driver f;
  Coefficient g = Coefficient::constant(0.0, CoeffDomain::Space);
  double lipschitz_C = 1.0;
  bool mean_field_dependent = true;  // driver mentions the primed slots
  bool monotone_in_yprime = false;
};

struct LipschitzAudit {
  double max_slope_yp = 0.0, max_slope_zp = 0.0, max_slope_y = 0.0, max_slope_z = 0.0;
  bool within_declared = true;
};

/// Sampled finite-difference audit of the declared Lipschitz constant over a
/// box; violations are reported, not fatal.
LipschitzAudit audit_lipschitz(const MfBsdeProblem& p, double box_half_width = 10.0,
                               int n_samples = 1000, std::uint64_t seed = 7);

struct IterationDistance {
  double dY = 0.0;
  double dZ = 0.0;
  double combined() const;
};

struct MfBsdeSolution {
  ValueSurface surface;            // u(t, x): the Y-representation
  std::vector<double> z_surface;   // w(t, x) = v_x(t, x) * sigma_t, same layout as surface.v
  int iterations = 0;
  std::vector<IterationDistance> distances;
  double beta_used = 0.0;
  double M_used = 1.0;

  double z_at(std::size_t k, int j) const { return z_surface[k * surface.space.n_x + j]; }
  double z_value(std::size_t k, double x) const;
};

struct SolveOptions {
  double tol = 1e-9;
  int max_iter = 25;
  int n_quad = 32;
  int n_x = 400;
  std::optional<SpaceGrid> space;  // overrides auto sizing when set
  PdeOptions pde;
  std::optional<double> beta;      // overrides 16 M C^2 + 4/M when set
};

/// Picard fixed point of the contraction mapping: freeze the mean-field slots
/// at the previous iterate, solve the frozen PDE, measure the weighted
/// distance, repeat. beta defaults to 16 M C^2 + 4/M with M from
/// ratio_bound_report.
MfBsdeSolution picard_solve(const MfBsdeProblem& p, const SolveOptions& opts = {});

/// Weighted distance between two candidate surfaces:
/// dY^2 = int e^{beta t} E|u1 - u2|^2(t) dt,
/// dZ^2 = int t^{2H-1} e^{beta t} E|w1 - w2|^2(t) dt,
/// expectations against the Gaussian marginal of eta.
IterationDistance weighted_distance(const ValueSurface& u1, const std::vector<double>& w1,
                                    const ValueSurface& u2, const std::vector<double>& w2,
                                    const ForwardSpec& spec, double beta,
                                    const std::vector<GaussianLaw>& laws, int n_quad = 32);

/// Successive ratios r_k = d_{k+1}/d_k of the combined metric; flags r > 0.6
/// from the second ratio on.
struct ContractionReport {
  std::vector<double> ratios;
  std::vector<bool> flagged;
};
ContractionReport contraction_report(const MfBsdeSolution& sol);

/// Empirical a-priori-estimate ratios: LHS(t) = e^{beta t} E|Y_t|^2 +
/// int_t^T e^{beta s} s^{2H-1} E|Z_s|^2 ds against Theta(t,T) =
/// e^{beta T} E|g(eta_T)|^2 + int_t^T e^{beta s} E|f0(s,eta_s)|^2 ds.
struct AprioriReport {
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> theta;
  double sup_ratio = 0.0;
  bool finite = true;
  bool inconsistent = false;  // Theta == 0 with LHS > 0 somewhere
};
AprioriReport apriori_check(const MfBsdeProblem& p, const MfBsdeSolution& sol, int n_quad = 32);

/// Pathwise one-step residuals of the discrete BSDE along simulated eta
/// paths: R_i = Y_i - Y_{i+1} - h_i dt_i + Z_i dB_i.
struct ResidualReport {
  std::vector<double> mean;  // per step
  std::vector<double> rms;   // per step
  double overall_rms = 0.0;
};
ResidualReport discrete_residual(const MfBsdeProblem& p, const MfBsdeSolution& sol,
                                 const fbm::FbmPathBatch& batch);

/// Comparison harness: checks the ordering preconditions by sampling, solves
/// both problems, and reports the maximal violation of u1 <= u2.
struct ComparisonVerdict {
  bool ordered = false;
  double max_violation = 0.0;  // max over the grid of u1 - u2
  MfBsdeSolution first, second;
};
ComparisonVerdict compare_solutions(const MfBsdeProblem& p1, const MfBsdeProblem& p2, double tol,
                                    const SolveOptions& opts = {});

/// The monotone iteration from a supersolution start: freeze only the primed
/// slots at the previous iterate and solve; the trace of sup(new - old) is
/// recorded and must stay below tol. Uses beta = 12 M C^2 + 4/M.
struct MonotoneTrace {
  std::vector<double> max_increase;  // per iteration, should be <= tol
};
MfBsdeSolution monotone_iteration_solve(const MfBsdeProblem& p, const MfBsdeSolution& start,
                                        MonotoneTrace* trace = nullptr,
                                        const SolveOptions& opts = {});

/// Diagnostics JSON (iterations, distances, beta, M, residual summary).
std::string diagnostics_json(const MfBsdeSolution& sol, const ResidualReport* residuals = nullptr);

}  // namespace fmbsde
