#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "eqdisc/baseline.hpp"
#include "eqdisc/simulate.hpp"

using namespace eqdisc;

namespace {

Dataset function_path(Eigen::Index n, double dt, double (*f)(double)) {
  Vector t(n);
  Matrix v(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = dt * static_cast<double>(i);
    v(0, i) = f(t[i]);
  }
  return Dataset({SamplePath(t, v)});
}

}  // namespace

TEST_CASE("derivatives are exact for linear and quadratic data", "[baseline]") {
  const Dataset linear = function_path(20, 0.3, [](double t) { return t; });
  const auto dlin = estimate_derivatives(linear, DerivativeMethod::central_difference);
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(dlin[0](0, i) == Catch::Approx(1.0).margin(1e-12));

  const Dataset quad = function_path(20, 0.3, [](double t) { return t * t; });
  const auto dq = estimate_derivatives(quad, DerivativeMethod::central_difference);
  for (Eigen::Index i = 0; i < 20; ++i)
    CHECK(dq[0](0, i) == Catch::Approx(2.0 * 0.3 * static_cast<double>(i)).margin(1e-10));
}

TEST_CASE("derivative error on sin t is below 1e-4 at dt = 0.01", "[baseline]") {
  const Dataset data = function_path(629, 0.01, [](double t) { return std::sin(t); });
  const auto d = estimate_derivatives(data, DerivativeMethod::central_difference);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 629; ++i)
    worst = std::max(worst, std::abs(d[0](0, i) - std::cos(0.01 * static_cast<double>(i))));
  CHECK(worst < 1e-4);
}

TEST_CASE("smoothed differencing stays exact for linear data away from edges", "[baseline]") {
  const Dataset linear = function_path(30, 0.2, [](double t) { return 2.0 * t; });
  const auto d = estimate_derivatives(linear, DerivativeMethod::smoothed_difference, 5);
  for (Eigen::Index i = 3; i < 27; ++i) CHECK(d[0](0, i) == Catch::Approx(2.0).margin(1e-10));
  CHECK_THROWS_AS(estimate_derivatives(linear, DerivativeMethod::smoothed_difference, 4),
                  ContractViolation);
}

TEST_CASE("estimate_derivatives needs at least three points", "[baseline]") {
  Vector t(2);
  t << 0.0, 1.0;
  const Dataset tiny({SamplePath(t, Matrix::Zero(1, 2))});
  CHECK_THROWS_AS(estimate_derivatives(tiny, DerivativeMethod::central_difference),
                  ContractViolation);
}

TEST_CASE("stlsq recovers sparse decay exactly from noiseless data", "[baseline]") {
  // dx/dt = -x sampled analytically; library {1, x, x^2}.
  const Eigen::Index n = 50;
  Matrix theta(n, 3);
  Matrix xdot(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = std::exp(-0.05 * static_cast<double>(i));
    theta(i, 0) = 1.0;
    theta(i, 1) = x;
    theta(i, 2) = x * x;
    xdot(i, 0) = -x;
  }
  const CoefficientMatrix c = stlsq(theta, xdot, {0.1, 20, 0.0});
  CHECK(c(0, 0) == 0.0);
  CHECK(c(0, 1) == Catch::Approx(-1.0).margin(1e-3));
  CHECK(c(0, 2) == 0.0);
}

TEST_CASE("stlsq with zero threshold is plain least squares", "[baseline]") {
  RandomEngine rng = make_engine(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix theta(40, 3);
  Matrix xdot(40, 1);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = gauss(rng);
  for (Eigen::Index i = 0; i < 40; ++i) xdot(i, 0) = gauss(rng);
  const CoefficientMatrix c = stlsq(theta, xdot, {0.0, 20, 0.0});
  // Normal-equations oracle.
  const Vector oracle = (theta.transpose() * theta).ldlt().solve(theta.transpose() * xdot.col(0));
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(c(0, k) == Catch::Approx(oracle[k]).margin(1e-10));
}

TEST_CASE("stlsq recovers predator-prey coefficients from exact derivatives", "[baseline]") {
  const TermLibrary lib = build_library(2, 2, false);
  CoefficientMatrix truth = CoefficientMatrix::Zero(2, 6);
  truth(0, 1) = 1.0;
  truth(0, 4) = -0.1;
  truth(1, 2) = -1.5;
  truth(1, 4) = 0.075;
  Vector x0(2);
  x0 << 10.0, 5.0;
  Vector t(400);
  for (Eigen::Index i = 0; i < 400; ++i) t[i] = 21.9 * static_cast<double>(i) / 399.0;
  const SimOutcome sim = integrate(lib, truth, x0, t, {20, 1e6});
  REQUIRE(sim.ok());

  // Derivatives taken from the model itself, not finite differences.
  Matrix theta(400, 6);
  Matrix xdot(400, 2);
  Vector terms(6);
  for (Eigen::Index i = 0; i < 400; ++i) {
    eval_terms_into(lib, sim.path->values.col(i), terms);
    theta.row(i) = terms;
    xdot.row(i) = (truth * terms).transpose();
  }
  const CoefficientMatrix c = stlsq(theta, xdot, {0.02, 20, 0.0});
  for (Eigen::Index j = 0; j < 2; ++j)
    for (Eigen::Index k = 0; k < 6; ++k)
      CHECK(c(j, k) == Catch::Approx(truth(j, k)).margin(1e-2));
}

TEST_CASE("stlsq is idempotent on its own active set", "[baseline]") {
  RandomEngine rng = make_engine(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix theta(60, 4);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = gauss(rng);
  Matrix xdot(60, 1);
  xdot.col(0) = 2.0 * theta.col(1) - 0.8 * theta.col(3);
  for (Eigen::Index i = 0; i < 60; ++i) xdot(i, 0) += 0.01 * gauss(rng);
  const StlsqConfig cfg{0.1, 20, 0.0};
  const CoefficientMatrix first = stlsq(theta, xdot, cfg);
  const CoefficientMatrix second = stlsq(theta, xdot, cfg);
  CHECK((first.array() == second.array()).all());
  // Re-running restricted to the surviving columns changes nothing.
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < 4; ++k)
    if (first(0, k) != 0.0) active.push_back(k);
  Matrix sub(60, static_cast<Eigen::Index>(active.size()));
  for (std::size_t c2 = 0; c2 < active.size(); ++c2) sub.col(static_cast<Eigen::Index>(c2)) = theta.col(active[c2]);
  const CoefficientMatrix refit = stlsq(sub, xdot, cfg);
  for (std::size_t c2 = 0; c2 < active.size(); ++c2)
    CHECK(refit(0, static_cast<Eigen::Index>(c2)) ==
          Catch::Approx(first(0, active[c2])).margin(1e-12));
}

TEST_CASE("stlsq names colinear columns", "[baseline]") {
  Matrix theta(30, 3);
  RandomEngine rng = make_engine(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < 30; ++i) {
    theta(i, 0) = gauss(rng);
    theta(i, 1) = 2.0 * theta(i, 0);  // exact duplicate direction
    theta(i, 2) = gauss(rng);
  }
  Matrix xdot(30, 1);
  for (Eigen::Index i = 0; i < 30; ++i) xdot(i, 0) = gauss(rng);
  CHECK_THROWS_WITH(stlsq(theta, xdot, {0.0, 20, 0.0}),
                    Catch::Matchers::ContainsSubstring("colinear"));
  // Ridge regularization sidesteps the singularity.
  CHECK_NOTHROW(stlsq(theta, xdot, {0.0, 20, 1e-6}));
}

TEST_CASE("stlsq validates the stacked system", "[baseline]") {
  CHECK_THROWS_AS(stlsq(Matrix::Zero(2, 3), Matrix::Zero(2, 1), {0.1, 20, 0.0}),
                  ContractViolation);
  CHECK_THROWS_AS(stlsq(Matrix::Zero(5, 3), Matrix::Zero(4, 1), {0.1, 20, 0.0}),
                  ContractViolation);
  CHECK_THROWS_AS(stlsq(Matrix::Zero(5, 3), Matrix::Zero(5, 1), {-0.1, 20, 0.0}),
                  ContractViolation);
}
