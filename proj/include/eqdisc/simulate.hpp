#pragma once

#include <optional>
#include <vector>

#include "eqdisc/core.hpp"
#include "eqdisc/detail/parallel.hpp"

namespace eqdisc {

/// Classical RK4 with a fixed number of uniform substeps per observation
/// interval. Fixed stepping keeps batch runs reproducible bit for bit.
struct IntegratorConfig {
  int substeps_per_interval = 10;
  double blowup_threshold = 1e6;
};

/// Either a complete trajectory, or a divergence marker carrying the index of
/// the first observation time that was not reached.
struct SimOutcome {
  std::optional<SamplePath> path;
  std::optional<Eigen::Index> diverged_at;

  [[nodiscard]] bool ok() const { return path.has_value(); }
};

/// Integrate dx/dt = coeffs * theta(x) over the observation grid.
[[nodiscard]] inline SimOutcome integrate(const TermLibrary& lib, const CoefficientMatrix& coeffs,
                                          const Vector& x0, const Vector& times,
                                          const IntegratorConfig& cfg) {
  if (cfg.substeps_per_interval < 1)
    throw ContractViolation("integrate: substeps_per_interval must be >= 1");
  if (!(cfg.blowup_threshold > 0.0))
    throw ContractViolation("integrate: blowup_threshold must be > 0");
  if (coeffs.rows() != lib.state_dim || coeffs.cols() != lib.size())
    throw ContractViolation("integrate: coefficient matrix shape does not match library");
  if (x0.size() != lib.state_dim)
    throw ContractViolation("integrate: initial state dimension does not match library");
  if (times.size() < 1) throw ContractViolation("integrate: empty time grid");
  for (Eigen::Index i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw ContractViolation("integrate: times must be strictly increasing");

  const Eigen::Index p = x0.size();
  const Eigen::Index n = times.size();
  Matrix values(p, n);

  Vector x = x0;
  Vector theta(lib.size());
  Vector k1(p), k2(p), k3(p), k4(p), xs(p);
  const auto rhs = [&](const Vector& state, Vector& dx) {
    eval_terms_into(lib, state, theta);
    dx.noalias() = coeffs * theta;
  };
  const auto exploded = [&](const Vector& state) {
    return !state.allFinite() || state.cwiseAbs().maxCoeff() > cfg.blowup_threshold;
  };

  if (exploded(x)) return {std::nullopt, 0};
  values.col(0) = x;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = (times[i] - times[i - 1]) / cfg.substeps_per_interval;
    for (int s = 0; s < cfg.substeps_per_interval; ++s) {
      rhs(x, k1);
      xs = x + 0.5 * h * k1;
      rhs(xs, k2);
      xs = x + 0.5 * h * k2;
      rhs(xs, k3);
      xs = x + h * k3;
      rhs(xs, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (exploded(x)) return {std::nullopt, i};
    }
    values.col(i) = x;
  }
  return {SamplePath(times, std::move(values)), std::nullopt};
}

/// Integrate every coefficient sample. Element order is preserved and each
/// element is a pure function of its inputs, so results do not depend on the
/// thread count.
[[nodiscard]] inline std::vector<SimOutcome> push_forward(const TermLibrary& lib,
                                                          const std::vector<CoefficientMatrix>& samples,
                                                          const Vector& x0, const Vector& times,
                                                          const IntegratorConfig& cfg,
                                                          int threads = 0) {
  if (samples.empty()) throw ContractViolation("push_forward: empty sample list");
  std::vector<SimOutcome> out(samples.size());
  detail::parallel_for(samples.size(), threads,
                       [&](std::size_t i) { out[i] = integrate(lib, samples[i], x0, times, cfg); });
  return out;
}

}  // namespace eqdisc
