#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <vector>

#include "eqdisc/core.hpp"
#include "eqdisc/detail/stats.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

/// Non-overlapping, contiguous blocks of equal length l covering the first
/// floor(n/l)*l points of a series; the trailing remainder is dropped.
struct BlockPartition {
  Eigen::Index block_length = 0;
  Eigen::Index block_count = 0;
  Eigen::Index series_length = 0;

  [[nodiscard]] Eigen::Index start(Eigen::Index block) const { return block * block_length; }
  [[nodiscard]] Eigen::Index last(Eigen::Index block) const {
    return block * block_length + block_length - 1;
  }
};

struct MbbConfig {
  Eigen::Index block_length = 0;
  double bandwidth = 0.0;
  Eigen::Index replicate_count = 100;
  std::uint64_t seed = 0;
};

[[nodiscard]] inline BlockPartition partition_blocks(const SamplePath& path,
                                                     Eigen::Index block_length) {
  const Eigen::Index n = path.length();
  if (block_length < 1 || block_length > n)
    throw ContractViolation("partition_blocks: block length must satisfy 1 <= l <= n");
  return {block_length, n / block_length, n};
}

/// Plain cube-root rule for the default block length.
[[nodiscard]] inline Eigen::Index default_block_length(Eigen::Index n) {
  if (n < 1) throw ContractViolation("default_block_length: empty series");
  const auto l = static_cast<Eigen::Index>(std::ceil(std::cbrt(static_cast<double>(n))));
  return std::min(std::max<Eigen::Index>(l, 1), n);
}

/// Default matching bandwidth: sample SD of the block-endpoint values (pooled
/// over state variables) scaled by block_count^{-1/5}.
[[nodiscard]] inline double default_mbb_bandwidth(const SamplePath& path,
                                                  const BlockPartition& part) {
  std::vector<double> endpoints;
  endpoints.reserve(static_cast<std::size_t>(part.block_count * path.state_dim()));
  for (Eigen::Index b = 0; b < part.block_count; ++b)
    for (Eigen::Index j = 0; j < path.state_dim(); ++j)
      endpoints.push_back(path.values(j, part.last(b)));
  const double sd = detail::sample_sd(endpoints);
  if (!(sd > 0.0)) return 1.0;  // degenerate endpoints: any h gives uniform matching
  return sd * std::pow(static_cast<double>(part.block_count), -0.2);
}

namespace detail {

// Normalized block-selection probabilities from per-variable Gaussian kernel
// log-weights. The shared kernel constant cancels in the softmax.
[[nodiscard]] inline Vector softmax_weights(const Vector& log_w) {
  const double m = log_w.maxCoeff();
  if (!std::isfinite(m)) {
    std::clog << "eqdisc: degenerate block-matching weights, falling back to uniform\n";
    return Vector::Constant(log_w.size(), 1.0 / static_cast<double>(log_w.size()));
  }
  Vector w = (log_w.array() - m).exp();
  return w / w.sum();
}

template <class Engine>
[[nodiscard]] Eigen::Index sample_index(const Vector& probs, Engine& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

}  // namespace detail

/// Probability that each block follows the current one. A candidate block is
/// matched through the endpoint of its predecessor in the original partition.
/// The first block has no predecessor, so its start value is matched against
/// the value that follows the current block in the original series (the
/// current block's own endpoint when nothing follows it). Per-variable kernel
/// weights are combined by product.
[[nodiscard]] inline Vector transition_probs(const BlockPartition& part, const SamplePath& path,
                                             Eigen::Index current_block, double h) {
  if (part.series_length != path.length())
    throw ContractViolation("transition_probs: partition does not match path");
  if (current_block < 0 || current_block >= part.block_count)
    throw ContractViolation("transition_probs: current block index out of range");
  if (!(h > 0.0)) throw ContractViolation("transition_probs: bandwidth must be > 0");
  const Eigen::Index p = path.state_dim();
  const Eigen::Index after = std::min(part.last(current_block) + 1, path.length() - 1);
  Vector log_w(part.block_count);
  for (Eigen::Index j = 0; j < part.block_count; ++j) {
    double acc = 0.0;
    for (Eigen::Index v = 0; v < p; ++v) {
      const double d =
          j == 0 ? (path.values(v, after) - path.values(v, part.start(0))) / h
                 : (path.values(v, part.last(current_block)) - path.values(v, part.last(j - 1))) / h;
      acc -= 0.5 * d * d;
    }
    log_w[j] = acc;
  }
  return detail::softmax_weights(log_w);
}

namespace detail {

// Initial block distribution: candidate start values matched against the
// original first block's start value.
[[nodiscard]] inline Vector initial_block_probs(const BlockPartition& part, const SamplePath& path,
                                                double h) {
  const Eigen::Index p = path.state_dim();
  Vector log_w = Vector::Zero(part.block_count);
  for (Eigen::Index j = 0; j < part.block_count; ++j) {
    double acc = 0.0;
    for (Eigen::Index v = 0; v < p; ++v) {
      const double d = (path.values(v, part.start(j)) - path.values(v, part.start(0))) / h;
      acc -= 0.5 * d * d;
    }
    log_w[j] = acc;
  }
  return softmax_weights(log_w);
}

}  // namespace detail

/// Matched block bootstrap: r replicate paths assembled by the Markov block
/// chain until length >= n, truncated to n, on the original time grid.
[[nodiscard]] inline Dataset mbb_resample(const SamplePath& path, const MbbConfig& cfg) {
  if (cfg.replicate_count < 1)
    throw ContractViolation("mbb_resample: replicate_count must be >= 1");
  if (!(cfg.bandwidth > 0.0)) throw ContractViolation("mbb_resample: bandwidth must be > 0");
  const BlockPartition part = partition_blocks(path, cfg.block_length);
  const Eigen::Index n = path.length();
  const Eigen::Index p = path.state_dim();
  const Vector initial = detail::initial_block_probs(part, path, cfg.bandwidth);
  std::vector<Vector> transitions(static_cast<std::size_t>(part.block_count));
  for (Eigen::Index b = 0; b < part.block_count; ++b)
    transitions[static_cast<std::size_t>(b)] = transition_probs(part, path, b, cfg.bandwidth);

  std::vector<SamplePath> replicates;
  replicates.reserve(static_cast<std::size_t>(cfg.replicate_count));
  for (Eigen::Index rep = 0; rep < cfg.replicate_count; ++rep) {
    RandomEngine rng = make_engine(sub_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    Matrix values(p, n);
    Eigen::Index filled = 0;
    Eigen::Index current = detail::sample_index(initial, rng);
    while (filled < n) {
      const Eigen::Index take = std::min(part.block_length, n - filled);
      values.middleCols(filled, take) = path.values.middleCols(part.start(current), take);
      filled += take;
      if (filled < n)
        current = detail::sample_index(transitions[static_cast<std::size_t>(current)], rng);
    }
    replicates.emplace_back(path.times, std::move(values));
  }
  return Dataset(std::move(replicates));
}

}  // namespace eqdisc
