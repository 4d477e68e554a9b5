#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmbsde/expr.hpp"
#include "fmbsde/mfbsde.hpp"

namespace fmbsde {

/// One JSON document describing a run: problem data as expression strings,
/// discretization sizes, and solver knobs.
struct RunConfig {
  double hurst = 0.75;
  double horizon = 1.0;
  double eta0 = 0.0;

  int n_time = 256;
  int n_space = 400;
  int n_quad = 32;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 12345;

  std::string b = "0";       // expression over t
  std::string sigma = "1";   // expression over t
  std::string g = "x";       // expression over x
  std::string f = "0";       // expression over (t, x, yp, zp, y, z)

  // Second problem for `compare`; unset fields fall back to the first.
  std::optional<std::string> f2;
  std::optional<std::string> g2;

  double lipschitz_C = 1.0;
  bool monotone_in_yprime = false;
  double tol = 1e-9;
  int max_iter = 25;
  double sigma_min = 1e-8;
  double compare_tol = 1e-8;

  // Verify battery knobs.
  std::vector<double> verify_hursts = {0.6, 0.75, 0.9};
  std::size_t verify_paths = 100000;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  /// Parses every expression (throwing with position info on failure) and
  /// checks the scalar invariants.
  void validate() const;

  ForwardSpec forward_spec() const;
  MfBsdeProblem problem() const;       // driver/terminal from f, g
  MfBsdeProblem second_problem() const;  // from f2/g2 with fallback
  SolveOptions solve_options() const;

  /// Canonical JSON rendering (expressions re-printed canonically).
  std::string canonical_json() const;
};

/// Parsed coefficient helpers (shared with tests).
Coefficient coefficient_of_t(const std::string& src);
Coefficient coefficient_of_x(const std::string& src);
Driver driver_from(const std::string& src, bool* mean_field_dependent = nullptr);

/// FMBSDE_THREADS, clamped to [1, hardware]; 0/unset means hardware.
int configured_threads();

}  // namespace fmbsde
