#include <cmath>
#include <random>

#include "doctest.h"
#include "fmbsde/kernel.hpp"
#include "fmbsde/verify.hpp"

using namespace fmbsde;
using verify::CheckResult;
using verify::PolynomialFunctional;

namespace {

const TimeGrid kGrid = TimeGrid::uniform(1.0, 64);
const Hurst kH{0.75};

PolynomialFunctional bt_power(int e, double coef = 1.0) {
  return PolynomialFunctional::monomial({Coefficient::constant(1.0)}, coef, {e});
}

}  // namespace

TEST_CASE("polynomial functionals evaluate and differentiate") {
  // h(I) = 2 I^3 - I
  PolynomialFunctional phi;
  phi.kernels = {Coefficient::constant(1.0)};
  phi.terms = {{2.0, {3}}, {-1.0, {1}}};
  Eigen::RowVectorXd I(1);
  I << 1.5;
  CHECK(phi.eval(I) == doctest::Approx(2.0 * 3.375 - 1.5).epsilon(1e-15));

  const auto d = verify::malliavin_derivative(phi);
  REQUIRE(d.partials.size() == 1);
  // dh/dI = 6 I^2 - 1, kernel xi = 1
  CHECK(d.eval(I, 0.3) == doctest::Approx(6.0 * 2.25 - 1.0).epsilon(1e-14));

  // two kernels: h = I_1 I_2^2
  PolynomialFunctional p2;
  p2.kernels = {Coefficient::constant(1.0),
                Coefficient::from_function([](double t) { return t; })};
  p2.terms = {{1.0, {1, 2}}};
  const auto d2 = verify::malliavin_derivative(p2);
  Eigen::RowVectorXd J(2);
  J << 2.0, 3.0;
  // D_s = I_2^2 * 1 + 2 I_1 I_2 * s
  CHECK(d2.eval(J, 0.5) == doctest::Approx(9.0 + 2.0 * 2.0 * 3.0 * 0.5).epsilon(1e-14));
}

TEST_CASE("integrals over a batch match direct Wiener sums") {
  const auto batch = fbm::sample_paths(kGrid, kH, 64, 11);
  PolynomialFunctional phi = bt_power(2);
  const Eigen::MatrixXd I = phi.integrals(batch);
  REQUIRE(I.rows() == 64);
  REQUIRE(I.cols() == 1);
  const Eigen::VectorXd direct = fbm::wiener_integral_samples(Coefficient::constant(1.0), batch);
  CHECK((I.col(0) - direct).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("smoothed_kernel closed forms") {
  const double T = 1.0;
  // xi = 1: int_0^T phi(t - s) ds = H (t^{2H-1} + (T-t)^{2H-1})
  for (double t : {0.25, 0.5, 0.9}) {
    const double want =
        0.75 * (std::pow(t, 0.5) + std::pow(T - t, 0.5));
    CHECK(verify::smoothed_kernel(Coefficient::constant(1.0), t, T, kH) ==
          doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("linearity and two-cell additivity") {
    const auto left = Coefficient::piecewise_constant({0.0, 0.5, 1.0}, {1.0, 0.0});
    const auto right = Coefficient::piecewise_constant({0.0, 0.5, 1.0}, {0.0, 1.0});
    for (double t : {0.3, 0.7}) {
      const double whole = verify::smoothed_kernel(Coefficient::constant(1.0), t, T, kH);
      const double parts = verify::smoothed_kernel(left, t, T, kH) +
                           verify::smoothed_kernel(right, t, T, kH);
      CHECK(parts == doctest::Approx(whole).epsilon(1e-10));
    }
  }
}

TEST_CASE("dh_derivative of B_T^2 matches 2 B_T * smoothed kernel") {
  const auto batch = fbm::sample_paths(kGrid, kH, 128, 13);
  const double t = 0.5;
  const Eigen::VectorXd d = verify::dh_derivative(bt_power(2), t, batch);
  const double sk = verify::smoothed_kernel(Coefficient::constant(1.0), t, 1.0, kH);
  const Eigen::VectorXd bT = batch.paths.col(64);
  CHECK((d - 2.0 * sk * bT).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("duality checks") {
  const auto batch = fbm::sample_paths(kGrid, kH, 40000, 17);

  SUBCASE("Phi = B_T, u = 1: E[B_T delta(1)] = E[B_T^2] = ||1||_T^2 exactly in law") {
    const CheckResult r = verify::duality_check(bt_power(1), Coefficient::constant(1.0), batch);
    CHECK(r.se > 0.0);
    CHECK(r.pass());
  }

  SUBCASE("powers of B_T against u = 1") {
    for (int e : {2, 3}) {
      const CheckResult r = verify::duality_check(bt_power(e), Coefficient::constant(1.0), batch);
      CHECK(r.pass());
    }
  }

  SUBCASE("random degree-<=3 polynomials in two integrals") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    std::uniform_int_distribution<int> ue(0, 3);
    for (int trial = 0; trial < 10; ++trial) {
      PolynomialFunctional phi;
      phi.kernels = {Coefficient::constant(1.0),
                     Coefficient::from_function([](double t) { return t; })};
      for (int term = 0; term < 3; ++term) {
        int e1 = ue(rng), e2 = ue(rng);
        if (e1 + e2 > 3) e2 = 0;
        phi.terms.push_back({uc(rng), {e1, e2}});
      }
      const auto u = Coefficient::piecewise_constant({0.0, 0.4, 1.0}, {uc(rng), uc(rng)});
      const CheckResult r = verify::duality_check(phi, u, batch);
      CHECK(r.pass(4.0));
    }
  }
}

TEST_CASE("isometry checks") {
  const auto batch = fbm::sample_paths(kGrid, kH, 40000, 19);

  SUBCASE("deterministic integrands") {
    for (const auto& F :
         {Coefficient::constant(1.0),
          Coefficient::piecewise_constant({0.0, 0.25, 0.75, 1.0}, {1.0, -0.5, 2.0})}) {
      const CheckResult r = verify::isometry_check(F, batch);
      CHECK(r.se > 0.0);
      CHECK(r.pass());
    }
  }

  SUBCASE("quadrature rhs for F = B equals T^{4H}/2") {
    for (double H : {0.6, 0.75, 0.9})
      CHECK(verify::fbm_isometry_rhs(1.0, Hurst{H}) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(verify::fbm_isometry_rhs(2.0, Hurst{0.7}) ==
          doctest::Approx(0.5 * std::pow(2.0, 2.8)).epsilon(1e-6));
  }

  SUBCASE("stochastic integrand F = B") {
    const CheckResult r = verify::isometry_check_fbm(batch);
    CHECK(r.se > 0.0);
    CHECK(r.pass());
  }
}

TEST_CASE("test functions carry consistent derivatives") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double eps = 1e-6;
  for (const auto& F : {verify::TestFunction::square(), verify::TestFunction::quartic(),
                        verify::TestFunction::cosine(),
                        verify::TestFunction::polynomial({0.3, -1.0, 0.0, 2.0})}) {
    for (int trial = 0; trial < 5; ++trial) {
      const double t = 0.5 + 0.2 * u(rng), x = u(rng);
      const double fd_x = (F.value(t, x + eps) - F.value(t, x - eps)) / (2.0 * eps);
      const double fd_xx =
          (F.value(t, x + eps) - 2.0 * F.value(t, x) + F.value(t, x - eps)) / (eps * eps);
      const double fd_t = (F.value(t + eps, x) - F.value(t - eps, x)) / (2.0 * eps);
      CHECK(F.dx(t, x) == doctest::Approx(fd_x).epsilon(1e-7));
      CHECK(F.dxx(t, x) == doctest::Approx(fd_xx).epsilon(1e-3));
      CHECK(F.dt(t, x) == doctest::Approx(fd_t).epsilon(1e-6));
    }
  }
}

TEST_CASE("ito_mean_check on F(x) = x^2 with b = 0, sigma = 1") {
  // E[B_t^2] = t^{2H}: the correction term alone carries the growth.
  ForwardSpec spec;
  spec.eta0 = 0.0;
  spec.b = Coefficient::constant(0.0);
  spec.sigma = Coefficient::constant(1.0);
  spec.hurst = kH;
  spec.grid = kGrid;
  const auto batch = fbm::sample_paths(kGrid, kH, 40000, 29);
  const auto results =
      verify::ito_mean_check(verify::TestFunction::square(), spec, batch, {16, 32, 64});
  REQUIRE(results.size() == 3);
  for (const auto& r : results) {
    CHECK(r.se > 0.0);
    CHECK(r.pass());
  }
  CHECK(results[1].rhs == doctest::Approx(std::pow(0.5, 1.5)).epsilon(5e-3));
  CHECK(results[2].rhs == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("ito_mean_check with drift and the quartic") {
  ForwardSpec spec;
  spec.eta0 = 0.5;
  spec.b = Coefficient::constant(1.0);
  spec.sigma = Coefficient::constant(1.0);
  spec.hurst = Hurst{0.6};
  spec.grid = kGrid;
  const auto batch = fbm::sample_paths(kGrid, spec.hurst, 40000, 37);
  for (const auto& F : {verify::TestFunction::quartic(), verify::TestFunction::cosine()}) {
    const auto results = verify::ito_mean_check(F, spec, batch, {32, 64});
    for (const auto& r : results) CHECK(r.pass());
  }
}

TEST_CASE("product_rule_check") {
  const auto batch = fbm::sample_paths(kGrid, kH, 40000, 41);
  const auto one = Coefficient::constant(1.0);
  const auto zero = Coefficient::constant(0.0);

  SUBCASE("f1 = f2 = 1, g = 0: E[B_t^2] = t^{2H}") {
    const auto results = verify::product_rule_check(one, one, zero, zero, batch, {16, 64});
    REQUIRE(results.size() == 2);
    for (const auto& r : results) CHECK(r.pass());
    CHECK(results[0].rhs == doctest::Approx(std::pow(0.25, 1.5)).epsilon(1e-4));
    CHECK(results[1].rhs == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("pure drift pair: X_1 = X_2 = t, no stochastic part") {
    const auto results = verify::product_rule_check(zero, zero, one, one, batch, {32, 64});
    for (const auto& r : results) {
      // both sides deterministic: lhs = rhs = t^2
      CHECK(std::abs(r.lhs - r.rhs) < 1e-10);
    }
    CHECK(results[1].lhs == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("mixed pair with a piecewise-constant kernel") {
    const auto pc = Coefficient::piecewise_constant({0.0, 0.5, 1.0}, {1.0, -1.0});
    const auto results = verify::product_rule_check(one, pc, one, zero, batch, {32, 64});
    for (const auto& r : results) CHECK(r.pass());
  }
}
