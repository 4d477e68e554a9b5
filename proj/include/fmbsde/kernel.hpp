#pragma once

#include <vector>

#include "fmbsde/coefficient.hpp"
#include "fmbsde/types.hpp"

namespace fmbsde {
namespace kernel {

constexpr double kDefaultSigmaMin = 1e-8;

/// phi(x) = H(2H-1)|x|^{2H-2}. Integrable singularity at 0; never call there.
double phi(double x, const Hurst& h);

/// Closed-form mass of phi over the rectangle [a,b] x [c,d]:
/// (|b-c|^{2H} + |a-d|^{2H} - |a-c|^{2H} - |b-d|^{2H}) / 2.
double cell_mass(double a, double b, double c, double d, const Hurst& h);

/// <xi, eta>_t = \int_0^t \int_0^t phi(u-v) xi_u eta_v du dv, by reduction of
/// both coefficients to piecewise-constant cells and exact cell masses.
double inner_product(const Coefficient& xi, const Coefficient& eta, double t, const Hurst& h,
                     const TimeGrid& grid, int refine = 8);

/// Convenience overload on a free uniform partition (m cells).
double inner_product(const Coefficient& xi, const Coefficient& eta, double t, const Hurst& h,
                     std::size_t m = 2048);

/// sigma_hat(t) = \int_0^t phi(t-v) sigma_v dv, closed form per cell.
/// Returns 0 at t = 0 (the limit).
double sigma_hat(const Coefficient& sigma, double t, const Hurst& h, const TimeGrid& grid,
                 int refine = 8);
double sigma_hat(const Coefficient& sigma, double t, const Hurst& h, std::size_t m = 2048);

/// sigma_tilde(t) = d/dt ||sigma||_t^2 = 2 sigma_hat(t) sigma(t).
double sigma_tilde(const Coefficient& sigma, double t, const Hurst& h, const TimeGrid& grid,
                   int refine = 8, double sigma_min = kDefaultSigmaMin);

/// ||sigma||_{t_k}^2 at every grid point, computed incrementally over the
/// refined partition (one O(m^2) pass for the whole profile).
std::vector<double> variance_profile(const Coefficient& sigma, const TimeGrid& grid,
                                     const Hurst& h, int refine = 8);

struct RatioBoundReport {
  double M = 1.0;                    // smallest M >= 1 with t^{2H-1}/M <= ratio <= M t^{2H-1}
  std::vector<double> times;         // positive grid points scanned
  std::vector<double> ratios;        // sigma_hat(t) / sigma(t)
};

/// Scans sigma_hat/sigma over the positive grid points and reports the tight
/// two-sided bound constant against t^{2H-1}. For constant sigma, M = 1/H.
RatioBoundReport ratio_bound_report(const Coefficient& sigma, const TimeGrid& grid, const Hurst& h,
                                    int refine = 8, double sigma_min = kDefaultSigmaMin);

/// Checks |sigma| >= sigma_min at cell values on the grid; throws otherwise.
void check_sign_definite(const Coefficient& sigma, const TimeGrid& grid,
                         double sigma_min = kDefaultSigmaMin);

}  // namespace kernel
}  // namespace fmbsde
