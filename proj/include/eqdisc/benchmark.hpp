#pragma once

#include <optional>
#include <string>

#include "eqdisc/core.hpp"
#include "eqdisc/simulate.hpp"

namespace eqdisc {

/// Protocol overrides for the named synthetic benchmarks; unset fields use
/// the benchmark's defaults.
struct BenchmarkOverrides {
  std::optional<Eigen::Index> path_count;
  std::optional<Eigen::Index> n_points;
  std::optional<double> t_end;
  std::optional<double> noise_level;
};

/// A generated benchmark: noisy observations, the generating coefficient
/// matrix (and, where coefficients were drawn per path, its per-entry SD),
/// the degree-2 library both refer to, and the true initial state.
struct Benchmark {
  std::string name;
  Dataset data;
  TermLibrary library;
  CoefficientMatrix truth;
  Matrix truth_sd;  // zero where the generator used fixed coefficients
  Vector x0;
  std::uint64_t seed = 0;
};

namespace detail {

[[nodiscard]] inline Vector linspace(double t0, double t1, Eigen::Index n) {
  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i)
    t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

// Predator-prey coefficients mapped onto the degree-2 library
// [1, u, v, u^2, uv, v^2]: du/dt = a*u - b*uv, dv/dt = -g*v + d*uv.
[[nodiscard]] inline CoefficientMatrix lotka_volterra_matrix(double a, double b, double g, double d) {
  CoefficientMatrix c = CoefficientMatrix::Zero(2, 6);
  c(0, 1) = a;
  c(0, 4) = -b;
  c(1, 2) = -g;
  c(1, 4) = d;
  return c;
}

// Lorenz coefficients on the degree-2 library
// [1, x, y, z, x^2, xy, xz, y^2, yz, z^2].
[[nodiscard]] inline CoefficientMatrix lorenz_matrix(double sigma, double rho, double beta) {
  CoefficientMatrix c = CoefficientMatrix::Zero(3, 10);
  c(0, 1) = -sigma;
  c(0, 2) = sigma;
  c(1, 1) = rho;
  c(1, 2) = -1.0;
  c(1, 6) = -1.0;
  c(2, 3) = -beta;
  c(2, 5) = 1.0;
  return c;
}

}  // namespace detail

// Lotka-Volterra protocol constants: mean coefficients, the spread of the
// per-path draws, the shared initial state, and a span of about four
// oscillation periods (the period at these parameters and amplitude is ~5.48).
inline constexpr double kLvAlphaMean = 1.0, kLvAlphaSd = 0.1;
inline constexpr double kLvBetaMean = 0.1, kLvBetaSd = 0.01;
inline constexpr double kLvGammaMean = 1.5, kLvGammaSd = 0.15;
inline constexpr double kLvDeltaMean = 0.075, kLvDeltaSd = 0.0075;
inline constexpr double kLvSpan = 21.9;
inline constexpr Eigen::Index kLvPoints = 220;
inline constexpr Eigen::Index kLvMultiPaths = 100;
inline constexpr double kLvNoiseLevel = 0.1;

// Lorenz protocol constants: canonical chaotic parameters, 10% additive
// noise, and a short window so trajectories have not fully decorrelated.
inline constexpr double kLorenzSigma = 10.0, kLorenzRho = 28.0, kLorenzBeta = 8.0 / 3.0;
inline constexpr double kLorenzSpan = 2.5;
inline constexpr Eigen::Index kLorenzPoints = 250;
inline constexpr double kLorenzNoiseLevel = 0.1;

/// Generate one of the named benchmarks: `lv_multi` (100 paths with
/// per-path coefficient draws and additive noise at 0.1 RMS), `lv_single`
/// (one mean-coefficient path with multiplicative lognormal noise), or
/// `lorenz` (one chaotic path with 10% additive noise).
[[nodiscard]] inline Benchmark generate_benchmark(const std::string& name, std::uint64_t seed,
                                                  const BenchmarkOverrides& overrides = {}) {
  Benchmark bench;
  bench.name = name;
  bench.seed = seed;
  RandomEngine rng = make_engine(sub_seed(seed, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::uint64_t noise_seed = sub_seed(seed, 2);

  if (name == "lv_multi" || name == "lv_single") {
    const bool multi = name == "lv_multi";
    const Eigen::Index r = multi ? overrides.path_count.value_or(kLvMultiPaths) : 1;
    const Eigen::Index n = overrides.n_points.value_or(kLvPoints);
    const double span = overrides.t_end.value_or(kLvSpan);
    const double noise = overrides.noise_level.value_or(kLvNoiseLevel);
    if (r < 1 || n < 2 || !(span > 0.0) || noise < 0.0)
      throw ContractViolation("generate_benchmark: invalid protocol overrides");
    bench.library = build_library(2, 2, false);
    bench.truth = detail::lotka_volterra_matrix(kLvAlphaMean, kLvBetaMean, kLvGammaMean, kLvDeltaMean);
    bench.truth_sd = Matrix::Zero(2, 6);
    if (multi) {
      bench.truth_sd(0, 1) = kLvAlphaSd;
      bench.truth_sd(0, 4) = kLvBetaSd;
      bench.truth_sd(1, 2) = kLvGammaSd;
      bench.truth_sd(1, 4) = kLvDeltaSd;
    }
    bench.x0 = Vector(2);
    bench.x0 << 10.0, 5.0;
    const Vector times = detail::linspace(0.0, span, n);
    const IntegratorConfig cfg{20, 1e6};
    std::vector<SamplePath> paths;
    paths.reserve(static_cast<std::size_t>(r));
    for (Eigen::Index i = 0; i < r; ++i) {
      CoefficientMatrix coeffs = bench.truth;
      if (multi)
        coeffs = detail::lotka_volterra_matrix(
            kLvAlphaMean + kLvAlphaSd * gauss(rng), kLvBetaMean + kLvBetaSd * gauss(rng),
            kLvGammaMean + kLvGammaSd * gauss(rng), kLvDeltaMean + kLvDeltaSd * gauss(rng));
      SimOutcome sim = integrate(bench.library, coeffs, bench.x0, times, cfg);
      if (!sim.ok())
        throw InferenceError("generate_benchmark: a true-coefficient draw diverged (seed " +
                             std::to_string(seed) + ")");
      paths.push_back(std::move(*sim.path));
    }
    NoiseSpec noise_spec{multi ? NoiseSpec::Kind::additive_gaussian
                               : NoiseSpec::Kind::multiplicative_lognormal,
                         noise, noise_seed};
    bench.data = add_noise(Dataset(std::move(paths)), noise_spec);
    return bench;
  }

  if (name == "lorenz") {
    const Eigen::Index n = overrides.n_points.value_or(kLorenzPoints);
    const double span = overrides.t_end.value_or(kLorenzSpan);
    const double noise = overrides.noise_level.value_or(kLorenzNoiseLevel);
    if (n < 2 || !(span > 0.0) || noise < 0.0)
      throw ContractViolation("generate_benchmark: invalid protocol overrides");
    bench.library = build_library(3, 2, false);
    bench.truth = detail::lorenz_matrix(kLorenzSigma, kLorenzRho, kLorenzBeta);
    bench.truth_sd = Matrix::Zero(3, 10);
    bench.x0 = Vector(3);
    bench.x0 << -8.0, 7.0, 27.0;
    const Vector times = detail::linspace(0.0, span, n);
    // Substep count chosen so the integration step stays at or below 2e-3.
    const double dt_obs = span / static_cast<double>(n - 1);
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt_obs / 2e-3)));
    SimOutcome sim = integrate(bench.library, bench.truth, bench.x0, times, {substeps, 1e6});
    if (!sim.ok()) throw InferenceError("generate_benchmark: lorenz reference run diverged");
    bench.data = add_noise(Dataset({std::move(*sim.path)}),
                           {NoiseSpec::Kind::additive_gaussian, noise, noise_seed});
    return bench;
  }

  throw ContractViolation("generate_benchmark: unknown benchmark '" + name +
                          "' (expected lv_multi, lv_single or lorenz)");
}

}  // namespace eqdisc
