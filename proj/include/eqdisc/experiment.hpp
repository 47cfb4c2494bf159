#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eqdisc/baseline.hpp"
#include "eqdisc/benchmark.hpp"
#include "eqdisc/bootstrap.hpp"
#include "eqdisc/config.hpp"
#include "eqdisc/csv.hpp"
#include "eqdisc/density.hpp"
#include "eqdisc/infer.hpp"
#include "eqdisc/priors.hpp"
#include "eqdisc/simulate.hpp"

namespace eqdisc {

/// Everything one discovery run produces. Every number is reproducible from
/// the echoed config and seed.
struct ResultBundle {
  ExperimentConfig config;

  Eigen::Index path_count = 0;
  Eigen::Index state_dim = 0;
  Eigen::Index point_count = 0;
  TermLibrary library;
  Vector x0;

  PosteriorEnsemble ensemble;
  PosteriorSummary summary;
  SelectedModel selected;
  std::vector<std::string> equations;
  PredictiveBand band;
  double band_coverage = 0.0;

  CoefficientMatrix baseline_coefficients;
  std::vector<std::string> baseline_equations;

  double kl_data_vs_prior_pushforward = 0.0;
  double kl_data_vs_posterior_pushforward = 0.0;
  std::optional<double> truth_kl_mean;
  std::vector<std::pair<std::pair<Eigen::Index, Eigen::Index>, double>> truth_kl_per_coefficient;

  std::optional<CoefficientMatrix> truth;
  Matrix truth_sd;  // per-entry generator SD; empty or zero when not applicable
  Vector noise_sd;  // estimated measurement-noise SD per variable (empty when disabled)
  std::optional<double> rmse_posterior_mean;
  std::optional<double> rmse_selected;
  std::optional<double> rmse_baseline;
};

namespace detail {

template <class F>
auto run_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const ContractViolation& e) {
    throw ContractViolation("[" + stage + "] " + e.what());
  } catch (const InferenceError& e) {
    throw InferenceError("[" + stage + "] " + e.what());
  } catch (const IoError& e) {
    throw IoError("[" + stage + "] " + e.what());
  }
}

// Quadratic least-squares fit over the first `window` points, evaluated at
// the first time, per variable; path estimates are averaged. Denoises the
// initial state without biasing it toward later dynamics.
[[nodiscard]] inline Vector smoothed_initial_state(const Dataset& data, int window) {
  const auto w = std::min<Eigen::Index>(window, data.length());
  const Eigen::Index p = data.state_dim();
  if (w < 3) {
    Vector x0 = Vector::Zero(p);
    for (const auto& path : data.paths) x0 += path.values.col(0);
    return x0 / static_cast<double>(data.path_count());
  }
  const Vector& t = data.times();
  Matrix design(w, 3);
  for (Eigen::Index i = 0; i < w; ++i) {
    const double dt = t[i] - t[0];
    design(i, 0) = 1.0;
    design(i, 1) = dt;
    design(i, 2) = dt * dt;
  }
  const auto qr = design.colPivHouseholderQr();
  Vector x0 = Vector::Zero(p);
  for (const auto& path : data.paths)
    for (Eigen::Index j = 0; j < p; ++j)
      x0[j] += qr.solve(path.values.row(j).head(w).transpose())[0];
  return x0 / static_cast<double>(data.path_count());
}

[[nodiscard]] inline Vector mean_initial_state(const Dataset& data) {
  Vector x0 = Vector::Zero(data.state_dim());
  for (const auto& path : data.paths) x0 += path.values.col(0);
  return x0 / static_cast<double>(data.path_count());
}

// Local quadratic least-squares smoothing. Unlike a boxcar average it keeps
// sharp peaks, which matters when the smoothed values feed a regression.
[[nodiscard]] inline Matrix local_quadratic_smooth(const Matrix& values, const Vector& times,
                                                   int window) {
  const Eigen::Index n = values.cols();
  const Eigen::Index half = window / 2;
  Matrix out(values.rows(), n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + half);
    const Eigen::Index w = hi - lo + 1;
    if (w < 4) {
      out.col(t) = values.col(t);
      continue;
    }
    Matrix design(w, 3);
    for (Eigen::Index i = 0; i < w; ++i) {
      const double dt = times[lo + i] - times[t];
      design(i, 0) = 1.0;
      design(i, 1) = dt;
      design(i, 2) = dt * dt;
    }
    const auto qr = design.colPivHouseholderQr();
    for (Eigen::Index j = 0; j < values.rows(); ++j)
      out(j, t) = qr.solve(values.row(j).segment(lo, w).transpose())[0];
  }
  return out;
}

/// Per-path value smoothing; used to prepare pilot fits and noise estimates.
[[nodiscard]] inline Dataset smooth_dataset(const Dataset& data, int window) {
  std::vector<SamplePath> out;
  out.reserve(data.paths.size());
  for (const auto& path : data.paths)
    out.emplace_back(path.times, local_quadratic_smooth(path.values, path.times, window));
  return Dataset(std::move(out));
}

/// Measurement-noise SD per variable, estimated from residuals against the
/// smoothed paths. Residual variance is deflated by the local quadratic fit's
/// center leverage 3(3w^2-7)/(4w(w^2-4)), which the estimate corrects for.
[[nodiscard]] inline Vector estimate_noise_sd(const Dataset& data, int window) {
  const Eigen::Index p = data.state_dim();
  const auto w = static_cast<double>(std::max(window, 5));
  const double leverage = 3.0 * (3.0 * w * w - 7.0) / (4.0 * w * (w * w - 4.0));
  const double dof = std::max(0.2, 1.0 - leverage);
  Vector ss = Vector::Zero(p);
  double count = 0.0;
  for (const auto& path : data.paths) {
    const Matrix resid =
        path.values - local_quadratic_smooth(path.values, path.times, window);
    ss += resid.array().square().rowwise().sum().matrix();
    count += static_cast<double>(path.length());
  }
  return (ss / (count * dof)).cwiseSqrt();
}

/// RMS magnitude of every library term over a dataset; the natural scale for
/// judging how much a coefficient contributes to its equation.
[[nodiscard]] inline Vector term_magnitudes(const Dataset& data, const TermLibrary& lib) {
  Vector ss = Vector::Zero(lib.size());
  Vector values(lib.size());
  double count = 0.0;
  for (const auto& path : data.paths)
    for (Eigen::Index t = 0; t < path.length(); ++t, count += 1.0) {
      eval_terms_into(lib, path.values.col(t), values);
      ss += values.cwiseAbs2();
    }
  return (ss / count).cwiseSqrt();
}

/// Two-stage pilot: a coarse STLSQ fit on the smoothed paths, then a plain
/// refit restricted per row to the dominant terms (contribution
/// |coef| * term-RMS at or above strong_fraction of the row's maximum). The
/// coarse fit smears signal into marginal terms; the refit hands it back.
struct PilotFit {
  CoefficientMatrix coarse;
  CoefficientMatrix refined;  // nonzero only on the dominant support
};

[[nodiscard]] inline PilotFit fit_pilot(const Dataset& smoothed, const TermLibrary& lib,
                                        const Vector& term_scale, const ExperimentConfig& cfg) {
  PilotFit fit;
  fit.coarse = fit_baseline(smoothed, lib, DerivativeMethod::central_difference, 1,
                            {cfg.pilot_threshold, 20, cfg.pilot_ridge});
  const Eigen::Index p = lib.state_dim;
  const Eigen::Index m = lib.size();
  const Eigen::Index n = smoothed.length();
  Matrix theta(smoothed.path_count() * n, m);
  Matrix targets(smoothed.path_count() * n, p);
  {
    const auto derivs = estimate_derivatives(smoothed, DerivativeMethod::central_difference);
    Vector values(m);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < smoothed.path_count(); ++i)
      for (Eigen::Index t = 0; t < n; ++t, ++row) {
        eval_terms_into(lib, smoothed.paths[static_cast<std::size_t>(i)].values.col(t), values);
        theta.row(row) = values;
        targets.row(row) = derivs[static_cast<std::size_t>(i)].col(t);
      }
  }
  fit.refined = CoefficientMatrix::Zero(p, m);
  const double ridge = std::max(cfg.pilot_ridge, 1e-10);
  for (Eigen::Index j = 0; j < p; ++j) {
    double row_scale = 0.0;
    for (Eigen::Index k = 0; k < m; ++k)
      row_scale = std::max(row_scale, std::abs(fit.coarse(j, k)) * term_scale[k]);
    if (!(row_scale > 0.0)) continue;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < m; ++k)
      if (std::abs(fit.coarse(j, k)) * term_scale[k] >= cfg.pilot_strong_fraction * row_scale)
        keep.push_back(k);
    if (keep.empty()) continue;
    Matrix sub(theta.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      sub.col(static_cast<Eigen::Index>(c)) = theta.col(keep[c]);
    Matrix normal = sub.transpose() * sub;
    normal.diagonal().array() += ridge;
    const Vector coef = normal.ldlt().solve(sub.transpose() * targets.col(j));
    for (std::size_t c = 0; c < keep.size(); ++c)
      fit.refined(j, keep[c]) = coef[static_cast<Eigen::Index>(c)];
  }
  return fit;
}

/// Spike-and-slab anchored at the pilot fit. Dominant terms (present in the
/// refined fit) get a high inclusion probability around the refit value;
/// marginal terms keep the coarse value with a low inclusion probability;
/// pilot-zero terms get a zero-centered slab. Slab widths are relative to the
/// anchor with a floor expressed as a fraction of the row's dominant
/// contribution, converted back to coefficient units per term.
[[nodiscard]] inline EntrywiseSpikeSlabSpec make_pilot_prior(const PilotFit& pilot,
                                                             const Vector& term_scale,
                                                             const ExperimentConfig& cfg) {
  const Eigen::Index p = pilot.coarse.rows();
  const Eigen::Index m = pilot.coarse.cols();
  EntrywiseSpikeSlabSpec spec;
  spec.location = Matrix::Zero(p, m);
  spec.scale = Matrix::Zero(p, m);
  spec.inclusion = Matrix::Zero(p, m);
  for (Eigen::Index j = 0; j < p; ++j) {
    double row_scale = 0.0;
    for (Eigen::Index k = 0; k < m; ++k)
      row_scale = std::max(
          row_scale, std::max(std::abs(pilot.refined(j, k)), std::abs(pilot.coarse(j, k))) *
                         term_scale[k]);
    if (!(row_scale > 0.0)) row_scale = 1.0;  // pilot found nothing in this row
    for (Eigen::Index k = 0; k < m; ++k) {
      const double floor = cfg.pilot_min_width * row_scale / term_scale[k];
      if (pilot.refined(j, k) != 0.0) {
        const double anchor = pilot.refined(j, k);
        spec.location(j, k) = anchor;
        spec.scale(j, k) = std::max(cfg.pilot_rel_width * std::abs(anchor), floor);
        spec.inclusion(j, k) = cfg.pilot_active_inclusion;
      } else if (pilot.coarse(j, k) != 0.0) {
        const double anchor = pilot.coarse(j, k);
        spec.location(j, k) = anchor;
        spec.scale(j, k) = std::max(cfg.pilot_rel_width * std::abs(anchor), floor);
        spec.inclusion(j, k) = cfg.pilot_inactive_inclusion;
      } else {
        spec.scale(j, k) = cfg.pilot_inactive_width * row_scale / term_scale[k];
        spec.inclusion(j, k) = cfg.pilot_inactive_inclusion;
      }
    }
  }
  return spec;
}

// Value matrices as flat vectors for the marginal KL diagnostics. The first
// time point is skipped: every simulation starts from the same x0, so that
// coordinate is deterministic and its density ratio is meaningless.
[[nodiscard]] inline std::vector<Vector> flatten_values(const std::vector<const Matrix*>& paths) {
  std::vector<Vector> out;
  out.reserve(paths.size());
  for (const auto* values : paths) {
    const Eigen::Index p = values->rows();
    const Eigen::Index n = values->cols() - 1;
    Vector v(p * n);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index t = 0; t < n; ++t) v[j * n + t] = (*values)(j, t + 1);
    out.push_back(std::move(v));
  }
  return out;
}

[[nodiscard]] inline std::string format_coefficient(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace detail

/// Human-readable equations for a coefficient matrix over a library; zero
/// rows render as "dxj/dt = 0".
[[nodiscard]] inline std::vector<std::string> format_equations(const CoefficientMatrix& coeffs,
                                                               const TermLibrary& lib) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < coeffs.rows(); ++j) {
    std::string eq = "d" + variable_name(static_cast<int>(j)) + "/dt =";
    bool first = true;
    for (Eigen::Index k = 0; k < coeffs.cols(); ++k) {
      const double v = coeffs(j, k);
      if (v == 0.0) continue;
      const std::string term = to_string(lib.terms[static_cast<std::size_t>(k)]);
      const std::string magnitude = detail::format_coefficient(std::abs(v));
      eq += first ? (v < 0.0 ? " -" : " ") : (v < 0.0 ? " - " : " + ");
      eq += magnitude;
      if (term != "1") eq += "*" + term;
      first = false;
    }
    if (first) eq += " 0";
    out.push_back(std::move(eq));
  }
  return out;
}

/// Fraction of observed values inside the band, over all paths, variables and
/// time points.
[[nodiscard]] inline double band_coverage(const PredictiveBand& band, const Dataset& data) {
  if (band.mean.rows() != data.state_dim() || band.mean.cols() != data.length())
    throw ContractViolation("band_coverage: band and dataset shapes disagree");
  double inside = 0.0, total = 0.0;
  for (const auto& path : data.paths)
    for (Eigen::Index j = 0; j < path.state_dim(); ++j)
      for (Eigen::Index t = 0; t < path.length(); ++t) {
        const double v = path.values(j, t);
        if (v >= band.lower(j, t) && v <= band.upper(j, t)) inside += 1.0;
        total += 1.0;
      }
  return inside / total;
}

/// End-to-end pipeline: acquire data, (optionally) bootstrap, sample the
/// prior, rejection-sample the posterior, select terms, build the predictive
/// band, fit the STLSQ baseline, and collect diagnostics.
[[nodiscard]] inline ResultBundle run_experiment(const ExperimentConfig& cfg) {
  {
    const auto problems = validate(cfg);
    if (!problems.empty()) {
      std::string msg = "config: validation failed";
      for (const auto& p : problems) msg += "\n  - " + p;
      throw ConfigError(msg);
    }
  }

  ResultBundle bundle;
  bundle.config = cfg;

  // Stage seeds are derived from the master seed, one per consumer.
  const std::uint64_t seed_benchmark = sub_seed(cfg.seed, 11);
  const std::uint64_t seed_bootstrap = sub_seed(cfg.seed, 12);
  const std::uint64_t seed_prior = sub_seed(cfg.seed, 13);
  const std::uint64_t seed_rejection = sub_seed(cfg.seed, 14);
  const std::uint64_t seed_truth_kl = sub_seed(cfg.seed, 15);

  // Data acquisition.
  Dataset observed = detail::run_stage("dataset", [&] {
    if (!cfg.csv_path.empty()) return load_csv(cfg.csv_path);
    BenchmarkOverrides ov;
    if (cfg.benchmark_paths > 0) ov.path_count = cfg.benchmark_paths;
    if (cfg.benchmark_points > 0) ov.n_points = cfg.benchmark_points;
    if (cfg.benchmark_span > 0.0) ov.t_end = cfg.benchmark_span;
    if (cfg.benchmark_noise >= 0.0) ov.noise_level = cfg.benchmark_noise;
    Benchmark bench = generate_benchmark(cfg.benchmark, seed_benchmark, ov);
    bundle.truth = std::move(bench.truth);
    bundle.truth_sd = std::move(bench.truth_sd);
    return std::move(bench.data);
  });
  bundle.path_count = observed.path_count();
  bundle.state_dim = observed.state_dim();
  bundle.point_count = observed.length();

  bundle.library = detail::run_stage("library", [&] {
    return build_library(static_cast<int>(observed.state_dim()), cfg.library_degree,
                         cfg.library_trig);
  });
  const TermLibrary& lib = bundle.library;
  if (bundle.truth &&
      (bundle.truth->rows() != lib.state_dim || bundle.truth->cols() != lib.size()))
    bundle.truth.reset();  // custom library: truth no longer comparable

  // Initial condition from the observed data (pre-bootstrap).
  bundle.x0 = detail::run_stage("initial_state", [&] {
    return cfg.x0_policy == "smoothed" ? detail::smoothed_initial_state(observed, cfg.x0_window)
                                       : detail::mean_initial_state(observed);
  });

  // Single path: matched block bootstrap supplies the reference ensemble.
  Dataset kde_data = detail::run_stage("bootstrap", [&] {
    if (observed.path_count() != 1 || !cfg.bootstrap_enabled) return observed;
    const SamplePath& path = observed.paths.front();
    MbbConfig mbb;
    mbb.block_length = cfg.bootstrap_block_length > 0 ? cfg.bootstrap_block_length
                                                      : default_block_length(path.length());
    const BlockPartition part = partition_blocks(path, mbb.block_length);
    mbb.bandwidth =
        cfg.bootstrap_bandwidth > 0.0 ? cfg.bootstrap_bandwidth : default_mbb_bandwidth(path, part);
    mbb.replicate_count = cfg.bootstrap_replicates;
    mbb.seed = seed_bootstrap;
    return mbb_resample(path, mbb);
  });

  // Prior sampling. The pilot prior regresses on value-smoothed paths (both
  // the derivatives and the term library see the smoothed values), then
  // anchors a per-entry spike-and-slab at the estimate.
  std::vector<CoefficientMatrix> prior_samples = detail::run_stage("prior", [&] {
    const Eigen::Index p = lib.state_dim;
    const Eigen::Index m = lib.size();
    if (cfg.prior_kind == "spike_slab")
      return sample_spike_slab(cfg.spike_slab, p, m, cfg.sampler_count, seed_prior);
    if (cfg.prior_kind == "horseshoe")
      return sample_horseshoe(cfg.horseshoe, p, m, cfg.sampler_count, seed_prior);
    const Dataset smoothed = detail::smooth_dataset(observed, cfg.pilot_smooth_window);
    const Vector scales = detail::term_magnitudes(smoothed, lib);
    const detail::PilotFit pilot = detail::fit_pilot(smoothed, lib, scales, cfg);
    return sample_entrywise_spike_slab(detail::make_pilot_prior(pilot, scales, cfg),
                                       cfg.sampler_count, seed_prior);
  });

  // Rejection sampling.
  RejectionOptions opts;
  if (cfg.kde_data_bandwidth > 0.0) opts.data_bandwidth = cfg.kde_data_bandwidth;
  if (cfg.kde_pushforward_bandwidth > 0.0) opts.pushforward_bandwidth = cfg.kde_pushforward_bandwidth;
  opts.data_bandwidth_scale = cfg.kde_data_bandwidth_scale;
  opts.pushforward_bandwidth_scale = cfg.kde_pushforward_bandwidth_scale;
  opts.min_acceptance_rate = cfg.sampler_min_acceptance;
  opts.threads = cfg.threads;
  opts.keep_simulations = true;
  bundle.ensemble = detail::run_stage("rejection", [&] {
    return rejection_sample(lib, prior_samples, kde_data, bundle.x0, cfg.integrator,
                            seed_rejection, opts);
  });

  // Posterior reporting.
  detail::run_stage("summary", [&] {
    bundle.summary = summarize(bundle.ensemble, cfg.select_level);
    bundle.selected = select_terms(bundle.ensemble, cfg.select_inclusion_threshold);
    bundle.equations = format_equations(bundle.selected.coefficients, lib);
    return 0;
  });

  // Predictive band over the observation grid, built from the phi-weighted
  // resample of the prior ensemble (same posterior law as the accept set,
  // more effective members). The measurement-noise channel of the
  // data-generating process is added back (estimated from smoothing
  // residuals) so the band describes observable values.
  Vector noise_sd;
  detail::run_stage("predictive_band", [&] {
    if (cfg.band_noise == "estimated")
      noise_sd = detail::estimate_noise_sd(observed, cfg.noise_window);
    bundle.noise_sd = noise_sd;
    // Duplicates are harmless in quantile estimates, so the band resample can
    // be larger than the weights' effective sample size.
    const auto sir = posterior_resample_indices(bundle.ensemble, sub_seed(cfg.seed, 16),
                                                std::max<Eigen::Index>(cfg.sampler_count / 4, 500));
    PosteriorEnsemble band_ensemble;
    band_ensemble.log_phi = bundle.ensemble.log_phi;
    band_ensemble.acceptance_rate = bundle.ensemble.acceptance_rate;
    band_ensemble.seed = bundle.ensemble.seed;
    for (std::size_t idx : sir) {
      band_ensemble.accepted.push_back(prior_samples[idx]);
      band_ensemble.accepted_indices.push_back(idx);
    }
    bundle.band = predictive_band(band_ensemble, lib, bundle.x0, observed.times(), cfg.integrator,
                                  cfg.select_level, cfg.threads, noise_sd, sub_seed(cfg.seed, 18));
    bundle.band_coverage = band_coverage(bundle.band, observed);
    return 0;
  });

  // Baseline comparator on the observed data.
  detail::run_stage("baseline", [&] {
    const auto method = cfg.baseline_derivative == "smoothed"
                            ? DerivativeMethod::smoothed_difference
                            : DerivativeMethod::central_difference;
    bundle.baseline_coefficients =
        fit_baseline(observed, lib, method, cfg.baseline_window, cfg.baseline);
    bundle.baseline_equations = format_equations(bundle.baseline_coefficients, lib);
    return 0;
  });

  // Diagnostics: push-forward KL before and after conditioning, truth KL and
  // RMSE when the generator's truth is available. Posterior-side sample sets
  // are phi-weighted resamplings of the full prior ensemble; they follow the
  // same law as the accept set but with far more effective samples.
  detail::run_stage("diagnostics", [&] {
    const std::uint64_t seed_resample = sub_seed(cfg.seed, 16);
    const auto sir = posterior_resample_indices(bundle.ensemble, seed_resample);

    // Simulated bundles get the same measurement-noise channel as the data
    // before their marginals are compared (one fixed draw per simulation).
    const std::uint64_t seed_noise = sub_seed(cfg.seed, 17);
    std::vector<Matrix> noisy_sims(bundle.ensemble.simulations.size());
    const auto noisy_sim = [&](std::size_t idx) -> const Matrix& {
      Matrix& slot = noisy_sims[idx];
      if (slot.size() == 0) {
        slot = bundle.ensemble.simulations[idx].path->values;
        if (noise_sd.size() != 0) {
          RandomEngine rng = make_engine(sub_seed(seed_noise, idx));
          std::normal_distribution<double> gauss(0.0, 1.0);
          for (Eigen::Index t = 0; t < slot.cols(); ++t)
            for (Eigen::Index j = 0; j < slot.rows(); ++j) slot(j, t) += noise_sd[j] * gauss(rng);
        }
      }
      return slot;
    };
    std::vector<const Matrix*> data_paths;
    for (const auto& path : observed.paths) data_paths.push_back(&path.values);
    std::vector<const Matrix*> prior_paths;
    for (std::size_t i = 0; i < bundle.ensemble.simulations.size(); ++i)
      if (bundle.ensemble.simulations[i].ok()) prior_paths.push_back(&noisy_sim(i));
    std::vector<const Matrix*> posterior_paths;
    for (std::size_t idx : sir) posterior_paths.push_back(&noisy_sim(idx));
    const auto data_vecs = detail::flatten_values(data_paths);
    bundle.kl_data_vs_prior_pushforward =
        estimate_kl(data_vecs, detail::flatten_values(prior_paths));
    bundle.kl_data_vs_posterior_pushforward =
        estimate_kl(data_vecs, detail::flatten_values(posterior_paths));

    if (bundle.truth) {
      bundle.rmse_posterior_mean = coefficient_rmse(bundle.summary.mean, *bundle.truth);
      bundle.rmse_selected = coefficient_rmse(bundle.selected.coefficients, *bundle.truth);
      bundle.rmse_baseline = coefficient_rmse(bundle.baseline_coefficients, *bundle.truth);
      if (bundle.truth_sd.size() > 0 && (bundle.truth_sd.array() > 0.0).any()) {
        RandomEngine rng = make_engine(seed_truth_kl);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double total = 0.0;
        for (Eigen::Index j = 0; j < bundle.truth->rows(); ++j)
          for (Eigen::Index k = 0; k < bundle.truth->cols(); ++k) {
            if (!(bundle.truth_sd(j, k) > 0.0)) continue;
            std::vector<Vector> truth_draws(static_cast<std::size_t>(cfg.truth_kl_samples));
            for (auto& v : truth_draws) {
              v = Vector(1);
              v[0] = (*bundle.truth)(j, k) + bundle.truth_sd(j, k) * gauss(rng);
            }
            std::vector<Vector> posterior_draws(sir.size());
            for (std::size_t i = 0; i < posterior_draws.size(); ++i) {
              posterior_draws[i] = Vector(1);
              posterior_draws[i][0] = prior_samples[sir[i]](j, k);
            }
            const double kl = estimate_kl(truth_draws, posterior_draws);
            bundle.truth_kl_per_coefficient.push_back({{j, k}, kl});
            total += kl;
          }
        if (!bundle.truth_kl_per_coefficient.empty())
          bundle.truth_kl_mean =
              total / static_cast<double>(bundle.truth_kl_per_coefficient.size());
      }
    }
    return 0;
  });

  return bundle;
}

}  // namespace eqdisc
