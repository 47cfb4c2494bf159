#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "eqdisc/core.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

/// Spike-and-slab: each coefficient is exactly zero with probability
/// 1 - inclusion_prob, otherwise N(0, slab_sd^2).
struct SpikeSlabSpec {
  double inclusion_prob = 0.2;
  double slab_sd = 2.0;
};

/// Regularized horseshoe: half-Cauchy local and global scales with an
/// inverse-gamma slab bound. nu and s control the slab's shape.
struct HorseshoeSpec {
  double tau0 = 0.1;
  double nu = 4.0;
  double s = 2.0;
};

/// Per-entry spike-and-slab: entry (j,k) is zero with probability
/// 1 - inclusion(j,k), otherwise N(location(j,k), scale(j,k)^2). Used for
/// data-anchored priors where coefficient scales differ per term.
struct EntrywiseSpikeSlabSpec {
  Matrix location;
  Matrix scale;
  Matrix inclusion;
};

/// N independent p x m draws. The c^2 and tau scales are drawn once per
/// matrix, the local beta scales once per entry; entries are visited row by
/// row. Each draw has its own sub-seeded engine, so generation can be split
/// across threads without changing results.
[[nodiscard]] inline std::vector<CoefficientMatrix> sample_spike_slab(const SpikeSlabSpec& spec,
                                                                      Eigen::Index p, Eigen::Index m,
                                                                      Eigen::Index count,
                                                                      std::uint64_t seed) {
  if (!(spec.inclusion_prob >= 0.0 && spec.inclusion_prob <= 1.0))
    throw ContractViolation("sample_spike_slab: inclusion_prob must be in [0, 1]");
  if (!(spec.slab_sd > 0.0)) throw ContractViolation("sample_spike_slab: slab_sd must be > 0");
  if (p < 1 || m < 1 || count < 1)
    throw ContractViolation("sample_spike_slab: shape and count must be positive");
  std::vector<CoefficientMatrix> out(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    RandomEngine rng = make_engine(sub_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CoefficientMatrix sample = CoefficientMatrix::Zero(p, m);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = 0; k < m; ++k)
        if (unit(rng) < spec.inclusion_prob) sample(j, k) = spec.slab_sd * gauss(rng);
    out[static_cast<std::size_t>(i)] = std::move(sample);
  }
  return out;
}

[[nodiscard]] inline std::vector<CoefficientMatrix> sample_horseshoe(const HorseshoeSpec& spec,
                                                                     Eigen::Index p, Eigen::Index m,
                                                                     Eigen::Index count,
                                                                     std::uint64_t seed) {
  if (!(spec.tau0 > 0.0 && spec.nu > 0.0 && spec.s > 0.0))
    throw ContractViolation("sample_horseshoe: tau0, nu and s must be > 0");
  if (p < 1 || m < 1 || count < 1)
    throw ContractViolation("sample_horseshoe: shape and count must be positive");
  std::vector<CoefficientMatrix> out(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    RandomEngine rng = make_engine(sub_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::gamma_distribution<double> gamma(spec.nu / 2.0, 1.0);
    // c^2 ~ Inv-Gamma(nu/2, nu s^2 / 2), tau ~ C+(0, tau0), once per matrix.
    const double c2 = (spec.nu * spec.s * spec.s / 2.0) / gamma(rng);
    const double c = std::sqrt(c2);
    const double tau = half_cauchy(rng, spec.tau0);
    CoefficientMatrix sample(p, m);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = 0; k < m; ++k) {
        const double beta = half_cauchy(rng, 1.0);
        const double slab = beta * c / std::sqrt(c2 + tau * tau * beta * beta);
        sample(j, k) = slab * tau * gauss(rng);
      }
    out[static_cast<std::size_t>(i)] = std::move(sample);
  }
  return out;
}

[[nodiscard]] inline std::vector<CoefficientMatrix> sample_entrywise_spike_slab(
    const EntrywiseSpikeSlabSpec& spec, Eigen::Index count, std::uint64_t seed) {
  const Eigen::Index p = spec.location.rows();
  const Eigen::Index m = spec.location.cols();
  if (p < 1 || m < 1 || count < 1)
    throw ContractViolation("sample_entrywise_spike_slab: shape and count must be positive");
  if (spec.scale.rows() != p || spec.scale.cols() != m || spec.inclusion.rows() != p ||
      spec.inclusion.cols() != m)
    throw ContractViolation("sample_entrywise_spike_slab: location/scale/inclusion shapes differ");
  if ((spec.scale.array() <= 0.0).any())
    throw ContractViolation("sample_entrywise_spike_slab: scales must be > 0");
  if ((spec.inclusion.array() < 0.0).any() || (spec.inclusion.array() > 1.0).any())
    throw ContractViolation("sample_entrywise_spike_slab: inclusions must be in [0, 1]");
  std::vector<CoefficientMatrix> out(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    RandomEngine rng = make_engine(sub_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CoefficientMatrix sample = CoefficientMatrix::Zero(p, m);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = 0; k < m; ++k)
        if (unit(rng) < spec.inclusion(j, k))
          sample(j, k) = spec.location(j, k) + spec.scale(j, k) * gauss(rng);
    out[static_cast<std::size_t>(i)] = std::move(sample);
  }
  return out;
}

}  // namespace eqdisc
