#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eqdisc/core.hpp"
#include "eqdisc/density.hpp"
#include "eqdisc/detail/parallel.hpp"
#include "eqdisc/detail/stats.hpp"
#include "eqdisc/rng.hpp"
#include "eqdisc/simulate.hpp"

namespace eqdisc {

/// Accepted coefficient samples plus per-sample diagnostics.
struct PosteriorEnsemble {
  std::vector<CoefficientMatrix> accepted;
  std::vector<std::size_t> accepted_indices;  // into the prior sample list
  std::vector<double> log_phi;                // one per prior sample; -inf for diverged
  double acceptance_rate = 0.0;
  Eigen::Index diverged_count = 0;
  std::uint64_t seed = 0;
  std::vector<SimOutcome> simulations;  // per prior sample; kept only on request
};

/// Per-coefficient empirical posterior statistics.
struct PosteriorSummary {
  Matrix mean;
  Matrix sd;
  Matrix lower;
  Matrix upper;
  Matrix inclusion;  // fraction of accepted samples with a nonzero entry
  double level = 0.95;
};

/// Pointwise posterior predictive quantile envelope plus the mean trajectory.
struct PredictiveBand {
  Vector times;
  Matrix mean;   // p x n
  Matrix lower;  // p x n
  Matrix upper;  // p x n
  double level = 0.95;
  Eigen::Index diverged_members = 0;
};

/// Sparse model read off an ensemble: active (variable, term) pairs and the
/// pruned coefficient point estimate.
struct SelectedModel {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> active;
  CoefficientMatrix coefficients;  // posterior means where active, exact zeros elsewhere
  PosteriorSummary summary;        // the 95% summary used for selection
  double inclusion_threshold = 0.5;
};

struct RejectionOptions {
  std::optional<double> data_bandwidth;        // absolute, all variables
  std::optional<double> pushforward_bandwidth;
  double data_bandwidth_scale = 1.0;           // multiplier on the fitted per-variable bandwidths
  double pushforward_bandwidth_scale = 1.0;
  double min_acceptance_rate = 0.005;
  int threads = 0;
  bool keep_simulations = false;
};

/// log phi = data log-likelihood minus push-forward log-density. Callers map
/// diverged candidates to -inf before reaching here.
[[nodiscard]] inline double compute_phi(const SamplePath& candidate, const KdeModel& data_kde,
                                        const KdeModel& prior_pushforward_kde) {
  if (data_kde.length() != prior_pushforward_kde.length() ||
      data_kde.state_dim() != prior_pushforward_kde.state_dim())
    throw ContractViolation("compute_phi: KDE grids disagree");
  return kde_log_likelihood(data_kde, candidate).value -
         kde_log_likelihood(prior_pushforward_kde, candidate).value;
}

namespace detail {

[[nodiscard]] inline bool accept_decision(double log_phi, double log_max, double xi) {
  return log_phi - log_max >= std::log(xi);
}

}  // namespace detail

/// Simulate every prior sample, fit the data KDE and the prior push-forward
/// KDE, and accept sample i when phi_i / max_j phi_j >= xi_i with
/// xi_i ~ Uniform(0,1) drawn from a counter-based stream. The best sample is
/// always accepted; diverged samples never are.
[[nodiscard]] inline PosteriorEnsemble rejection_sample(const TermLibrary& lib,
                                                        const std::vector<CoefficientMatrix>& prior_samples,
                                                        const Dataset& dataset, const Vector& x0,
                                                        const IntegratorConfig& cfg,
                                                        std::uint64_t seed,
                                                        const RejectionOptions& opts = {}) {
  if (prior_samples.empty()) throw ContractViolation("rejection_sample: no prior samples");

  std::vector<SimOutcome> sims =
      push_forward(lib, prior_samples, x0, dataset.times(), cfg, opts.threads);

  std::vector<SamplePath> simulated_paths;
  simulated_paths.reserve(sims.size());
  for (const auto& sim : sims)
    if (sim.ok()) simulated_paths.push_back(*sim.path);
  const auto diverged =
      static_cast<Eigen::Index>(sims.size() - simulated_paths.size());
  if (simulated_paths.empty())
    throw InferenceError(
        "rejection_sample: every prior sample diverged; the prior is inconsistent with the data "
        "scale (rescale the prior or raise blowup_threshold)");

  if (!(opts.data_bandwidth_scale > 0.0) || !(opts.pushforward_bandwidth_scale > 0.0))
    throw ContractViolation("rejection_sample: bandwidth scales must be > 0");
  KdeModel data_kde = fit_kde(dataset, opts.data_bandwidth);
  data_kde.bandwidths *= opts.data_bandwidth_scale;
  KdeModel pf_kde = fit_kde(Dataset(std::move(simulated_paths)), opts.pushforward_bandwidth);
  pf_kde.bandwidths *= opts.pushforward_bandwidth_scale;

  std::vector<double> log_phi(sims.size(), detail::kNegInf);
  detail::parallel_for(sims.size(), opts.threads, [&](std::size_t i) {
    if (sims[i].ok()) log_phi[i] = compute_phi(*sims[i].path, data_kde, pf_kde);
  });

  double log_max = detail::kNegInf;
  for (double v : log_phi) log_max = std::max(log_max, v);

  PosteriorEnsemble out;
  out.seed = seed;
  out.diverged_count = diverged;
  out.log_phi = std::move(log_phi);
  for (std::size_t i = 0; i < sims.size(); ++i) {
    if (!sims[i].ok()) continue;
    const double xi = uniform_from_counter(seed, i);
    if (detail::accept_decision(out.log_phi[i], log_max, xi)) {
      out.accepted.push_back(prior_samples[i]);
      out.accepted_indices.push_back(i);
    }
  }
  out.acceptance_rate =
      static_cast<double>(out.accepted.size()) / static_cast<double>(prior_samples.size());
  if (out.acceptance_rate < opts.min_acceptance_rate) {
    throw InferenceError(
        "rejection_sample: acceptance rate " + std::to_string(out.acceptance_rate * 100.0) +
        "% is below the " + std::to_string(opts.min_acceptance_rate * 100.0) +
        "% floor; the prior barely overlaps the data distribution (widen KDE bandwidths, "
        "re-center the prior, or increase the sample budget)");
  }
  if (opts.keep_simulations) out.simulations = std::move(sims);
  return out;
}

/// Effective sample size of the phi weights, (sum w)^2 / sum w^2.
[[nodiscard]] inline double effective_sample_size(const PosteriorEnsemble& ensemble) {
  double log_max = detail::kNegInf;
  for (double v : ensemble.log_phi) log_max = std::max(log_max, v);
  if (!std::isfinite(log_max)) return 0.0;
  double sum = 0.0, sum_sq = 0.0;
  for (double v : ensemble.log_phi) {
    const double w = std::exp(v - log_max);
    sum += w;
    sum_sq += w * w;
  }
  return sum * sum / sum_sq;
}

/// Posterior-weighted resampling indices into the prior sample list, with
/// weights proportional to phi (the distribution Algorithm 1's accept set
/// draws from). Sized to the weights' effective sample size by default so
/// duplicate draws stay rare and downstream KDEs see an honest sample count.
[[nodiscard]] inline std::vector<std::size_t> posterior_resample_indices(
    const PosteriorEnsemble& ensemble, std::uint64_t seed, Eigen::Index count = 0) {
  double log_max = detail::kNegInf;
  for (double v : ensemble.log_phi) log_max = std::max(log_max, v);
  if (!std::isfinite(log_max))
    throw ContractViolation("posterior_resample_indices: no finite phi values");
  if (count < 1)
    count = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(effective_sample_size(ensemble)));
  std::vector<double> cumulative(ensemble.log_phi.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ensemble.log_phi.size(); ++i) {
    total += std::exp(ensemble.log_phi[i] - log_max);
    cumulative[i] = total;
  }
  std::vector<std::size_t> out(static_cast<std::size_t>(count));
  for (Eigen::Index d = 0; d < count; ++d) {
    const double u = uniform_from_counter(seed, static_cast<std::uint64_t>(d)) * total;
    out[static_cast<std::size_t>(d)] = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  }
  return out;
}

/// Empirical mean, SD and central credible interval per coefficient.
[[nodiscard]] inline PosteriorSummary summarize(const PosteriorEnsemble& ensemble, double level = 0.95) {
  if (ensemble.accepted.empty()) throw ContractViolation("summarize: empty ensemble");
  if (!(level > 0.0 && level < 1.0)) throw ContractViolation("summarize: level must be in (0, 1)");
  const Eigen::Index p = ensemble.accepted.front().rows();
  const Eigen::Index m = ensemble.accepted.front().cols();
  const auto count = static_cast<double>(ensemble.accepted.size());
  PosteriorSummary s;
  s.level = level;
  s.mean = Matrix::Zero(p, m);
  s.sd = Matrix::Zero(p, m);
  s.lower = Matrix::Zero(p, m);
  s.upper = Matrix::Zero(p, m);
  s.inclusion = Matrix::Zero(p, m);
  std::vector<double> entry(ensemble.accepted.size());
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = 0; k < m; ++k) {
      double mean = 0.0, nonzero = 0.0;
      for (std::size_t i = 0; i < ensemble.accepted.size(); ++i) {
        entry[i] = ensemble.accepted[i](j, k);
        mean += entry[i];
        if (entry[i] != 0.0) nonzero += 1.0;
      }
      mean /= count;
      double ss = 0.0;
      for (double v : entry) ss += (v - mean) * (v - mean);
      s.mean(j, k) = mean;
      s.sd(j, k) = std::sqrt(ss / count);
      s.lower(j, k) = detail::quantile(entry, (1.0 - level) / 2.0);
      s.upper(j, k) = detail::quantile(entry, (1.0 + level) / 2.0);
      s.inclusion(j, k) = nonzero / count;
    }
  return s;
}

/// A term is active when its inclusion probability reaches the threshold and
/// its central 95% credible interval excludes zero.
[[nodiscard]] inline SelectedModel select_terms(const PosteriorEnsemble& ensemble,
                                                double inclusion_threshold = 0.5) {
  if (ensemble.accepted.empty()) throw ContractViolation("select_terms: empty ensemble");
  if (!(inclusion_threshold > 0.0 && inclusion_threshold < 1.0))
    throw ContractViolation("select_terms: inclusion threshold must be in (0, 1)");
  SelectedModel model;
  model.inclusion_threshold = inclusion_threshold;
  model.summary = summarize(ensemble, 0.95);
  const Eigen::Index p = model.summary.mean.rows();
  const Eigen::Index m = model.summary.mean.cols();
  model.coefficients = CoefficientMatrix::Zero(p, m);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = 0; k < m; ++k) {
      const bool ci_excludes_zero =
          model.summary.lower(j, k) > 0.0 || model.summary.upper(j, k) < 0.0;
      if (model.summary.inclusion(j, k) >= inclusion_threshold && ci_excludes_zero) {
        model.active.emplace_back(j, k);
        model.coefficients(j, k) = model.summary.mean(j, k);
      }
    }
  return model;
}

/// Push the accepted ensemble forward and take pointwise quantiles and means.
/// Diverged members are excluded and counted. When a per-variable
/// measurement-noise SD is supplied, each member is perturbed accordingly
/// (seeded, per member) before the quantiles, so the band describes new
/// observations rather than noise-free trajectories; the mean curve stays
/// noise-free.
[[nodiscard]] inline PredictiveBand predictive_band(const PosteriorEnsemble& ensemble,
                                                    const TermLibrary& lib, const Vector& x0,
                                                    const Vector& times, const IntegratorConfig& cfg,
                                                    double level = 0.95, int threads = 0,
                                                    const Vector& noise_sd = Vector(),
                                                    std::uint64_t noise_seed = 0) {
  if (ensemble.accepted.empty()) throw ContractViolation("predictive_band: empty ensemble");
  if (!(level > 0.0 && level < 1.0))
    throw ContractViolation("predictive_band: level must be in (0, 1)");
  if (noise_sd.size() != 0 && (noise_sd.size() != lib.state_dim || (noise_sd.array() < 0.0).any()))
    throw ContractViolation("predictive_band: noise_sd must hold one nonnegative SD per variable");
  const std::vector<SimOutcome> sims = push_forward(lib, ensemble.accepted, x0, times, cfg, threads);
  std::vector<Matrix> members;
  members.reserve(sims.size());
  Matrix mean_accum;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    if (!sims[i].ok()) continue;
    Matrix values = sims[i].path->values;
    if (mean_accum.size() == 0)
      mean_accum = values;
    else
      mean_accum += values;
    if (noise_sd.size() != 0) {
      RandomEngine rng = make_engine(sub_seed(noise_seed, i));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (Eigen::Index t = 0; t < values.cols(); ++t)
        for (Eigen::Index j = 0; j < values.rows(); ++j) values(j, t) += noise_sd[j] * gauss(rng);
    }
    members.push_back(std::move(values));
  }
  if (members.empty())
    throw InferenceError("predictive_band: every ensemble member diverged on this grid");

  const Eigen::Index p = members.front().rows();
  const Eigen::Index n = times.size();
  PredictiveBand band;
  band.times = times;
  band.level = level;
  band.diverged_members = static_cast<Eigen::Index>(sims.size() - members.size());
  band.mean = mean_accum / static_cast<double>(members.size());
  band.lower = Matrix::Zero(p, n);
  band.upper = Matrix::Zero(p, n);
  std::vector<double> column(members.size());
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < members.size(); ++i) column[i] = members[i](j, t);
      band.lower(j, t) = detail::quantile(column, (1.0 - level) / 2.0);
      band.upper(j, t) = detail::quantile(column, (1.0 + level) / 2.0);
    }
  return band;
}

/// Root-mean-square error between a point estimate and the truth, over all
/// p*m entries.
[[nodiscard]] inline double coefficient_rmse(const CoefficientMatrix& estimate,
                                             const CoefficientMatrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw ContractViolation("coefficient_rmse: shape mismatch");
  return std::sqrt((estimate - truth).array().square().mean());
}

[[nodiscard]] inline double coefficient_rmse(const PosteriorSummary& summary,
                                             const CoefficientMatrix& truth) {
  return coefficient_rmse(summary.mean, truth);
}

}  // namespace eqdisc
