#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqdisc/baseline.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/priors.hpp"
#include "eqdisc/simulate.hpp"

namespace eqdisc {

using Json = nlohmann::ordered_json;

/// Fully resolved experiment settings. The on-disk form is a flat JSON object
/// of dotted keys; every field has a default and unknown keys are rejected.
struct ExperimentConfig {
  // dataset source (exactly one)
  std::string benchmark;  // lv_multi | lv_single | lorenz
  std::string csv_path;

  // benchmark protocol overrides (0 / negative = benchmark default)
  Eigen::Index benchmark_paths = 0;
  Eigen::Index benchmark_points = 0;
  double benchmark_span = 0.0;
  double benchmark_noise = -1.0;

  int library_degree = 2;
  bool library_trig = false;

  std::string prior_kind = "spike_slab";  // spike_slab | horseshoe | pilot
  SpikeSlabSpec spike_slab{};
  HorseshoeSpec horseshoe{};

  // pilot prior: spike-and-slab anchored at a smoothed-derivative STLSQ fit
  double pilot_rel_width = 0.3;
  double pilot_min_width = 0.05;       // slab floor, fraction of the row's dominant contribution
  double pilot_strong_fraction = 0.15; // contribution share separating dominant from marginal terms
  double pilot_active_inclusion = 0.9;
  double pilot_inactive_inclusion = 0.2;
  double pilot_inactive_width = 0.15;  // zero-anchor slab width, fraction of dominant contribution
  double pilot_threshold = 0.02;
  int pilot_smooth_window = 7;
  double pilot_ridge = 1e-8;

  Eigen::Index sampler_count = 2000;
  double sampler_min_acceptance = 0.005;

  bool bootstrap_enabled = true;
  Eigen::Index bootstrap_replicates = 100;
  Eigen::Index bootstrap_block_length = 0;  // 0 = cube-root rule
  double bootstrap_bandwidth = 0.0;         // 0 = endpoint-SD rule

  IntegratorConfig integrator{};
  double kde_data_bandwidth = 0.0;          // 0 = Scott's rule
  double kde_pushforward_bandwidth = 0.0;   // 0 = Scott's rule
  double kde_data_bandwidth_scale = 1.0;    // multiplier on the per-variable bandwidths
  double kde_pushforward_bandwidth_scale = 1.0;

  std::string x0_policy = "first_observation";  // | smoothed
  int x0_window = 7;

  std::string band_noise = "estimated";  // | none: add the measurement-noise channel to bands/KL
  int noise_window = 5;                  // smoothing window for the residual noise estimate

  StlsqConfig baseline{};
  std::string baseline_derivative = "central";  // | smoothed
  int baseline_window = 5;

  double select_inclusion_threshold = 0.5;
  double select_level = 0.95;

  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = "results";
  Eigen::Index truth_kl_samples = 10000;
};

namespace detail {

struct ConfigBinder {
  ExperimentConfig& cfg;
  const Json& doc;
  std::vector<std::string> problems;
  std::vector<std::string> known;

  void string_field(const std::string& key, std::string& target) {
    known.push_back(key);
    if (!doc.contains(key)) return;
    if (!doc[key].is_string()) {
      problems.push_back(key + ": expected a string");
      return;
    }
    target = doc[key].get<std::string>();
  }

  void bool_field(const std::string& key, bool& target) {
    known.push_back(key);
    if (!doc.contains(key)) return;
    if (!doc[key].is_boolean()) {
      problems.push_back(key + ": expected a boolean");
      return;
    }
    target = doc[key].get<bool>();
  }

  template <class Int>
  void int_field(const std::string& key, Int& target) {
    known.push_back(key);
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer()) {
      problems.push_back(key + ": expected an integer");
      return;
    }
    target = static_cast<Int>(doc[key].get<long long>());
  }

  void real_field(const std::string& key, double& target) {
    known.push_back(key);
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) {
      problems.push_back(key + ": expected a number");
      return;
    }
    target = doc[key].get<double>();
  }
};

}  // namespace detail

/// Range checks applied before any computation starts; all problems are
/// reported at once.
[[nodiscard]] inline std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  const auto require = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  require(c.benchmark.empty() != c.csv_path.empty(),
          "dataset: exactly one of dataset.benchmark and dataset.csv must be set");
  if (!c.benchmark.empty())
    require(c.benchmark == "lv_multi" || c.benchmark == "lv_single" || c.benchmark == "lorenz",
            "dataset.benchmark: unknown benchmark '" + c.benchmark + "'");
  require(c.library_degree >= 0, "library.degree: must be >= 0");
  require(c.prior_kind == "spike_slab" || c.prior_kind == "horseshoe" || c.prior_kind == "pilot",
          "prior.kind: must be spike_slab, horseshoe or pilot");
  require(c.spike_slab.inclusion_prob >= 0.0 && c.spike_slab.inclusion_prob <= 1.0,
          "prior.inclusion_prob: must be in [0, 1]");
  require(c.spike_slab.slab_sd > 0.0, "prior.slab_sd: must be > 0");
  require(c.horseshoe.tau0 > 0.0, "prior.tau0: must be > 0");
  require(c.horseshoe.nu > 0.0, "prior.nu: must be > 0");
  require(c.horseshoe.s > 0.0, "prior.s: must be > 0");
  require(c.pilot_rel_width > 0.0, "pilot.rel_width: must be > 0");
  require(c.pilot_min_width > 0.0, "pilot.min_width: must be > 0");
  require(c.pilot_strong_fraction > 0.0 && c.pilot_strong_fraction <= 1.0,
          "pilot.strong_fraction: must be in (0, 1]");
  require(c.pilot_active_inclusion > 0.0 && c.pilot_active_inclusion <= 1.0,
          "pilot.active_inclusion: must be in (0, 1]");
  require(c.pilot_inactive_inclusion >= 0.0 && c.pilot_inactive_inclusion <= 1.0,
          "pilot.inactive_inclusion: must be in [0, 1]");
  require(c.pilot_inactive_width > 0.0, "pilot.inactive_width: must be > 0");
  require(c.pilot_threshold >= 0.0, "pilot.threshold: must be >= 0");
  require(c.pilot_smooth_window >= 1 && c.pilot_smooth_window % 2 == 1,
          "pilot.smooth_window: must be odd and positive");
  require(c.pilot_ridge >= 0.0, "pilot.ridge: must be >= 0");
  require(c.sampler_count >= 1, "sampler.count: must be >= 1");
  require(c.sampler_min_acceptance >= 0.0 && c.sampler_min_acceptance < 1.0,
          "sampler.min_acceptance: must be in [0, 1)");
  require(c.bootstrap_replicates >= 1, "bootstrap.replicates: must be >= 1");
  require(c.bootstrap_block_length >= 0, "bootstrap.block_length: must be >= 0 (0 = auto)");
  require(c.bootstrap_bandwidth >= 0.0, "bootstrap.bandwidth: must be >= 0 (0 = auto)");
  require(c.integrator.substeps_per_interval >= 1, "integrator.substeps: must be >= 1");
  require(c.integrator.blowup_threshold > 0.0, "integrator.blowup_threshold: must be > 0");
  require(c.kde_data_bandwidth >= 0.0, "kde.data_bandwidth: must be >= 0 (0 = Scott)");
  require(c.kde_pushforward_bandwidth >= 0.0, "kde.pushforward_bandwidth: must be >= 0 (0 = Scott)");
  require(c.kde_data_bandwidth_scale > 0.0, "kde.data_bandwidth_scale: must be > 0");
  require(c.kde_pushforward_bandwidth_scale > 0.0, "kde.pushforward_bandwidth_scale: must be > 0");
  require(c.x0_policy == "first_observation" || c.x0_policy == "smoothed",
          "x0.policy: must be first_observation or smoothed");
  require(c.x0_window >= 1, "x0.window: must be >= 1");
  require(c.band_noise == "estimated" || c.band_noise == "none",
          "band.noise: must be estimated or none");
  require(c.noise_window >= 5 && c.noise_window % 2 == 1,
          "noise.window: must be odd and >= 5");
  require(c.baseline.threshold >= 0.0, "baseline.threshold: must be >= 0");
  require(c.baseline.max_iters >= 1, "baseline.max_iters: must be >= 1");
  require(c.baseline.ridge >= 0.0, "baseline.ridge: must be >= 0");
  require(c.baseline_derivative == "central" || c.baseline_derivative == "smoothed",
          "baseline.derivative: must be central or smoothed");
  require(c.baseline_window >= 1 && c.baseline_window % 2 == 1,
          "baseline.window: must be odd and positive");
  require(c.select_inclusion_threshold > 0.0 && c.select_inclusion_threshold < 1.0,
          "select.inclusion_threshold: must be in (0, 1)");
  require(c.select_level > 0.0 && c.select_level < 1.0, "select.level: must be in (0, 1)");
  require(c.truth_kl_samples >= 10, "report.truth_kl_samples: must be >= 10");
  require(c.benchmark_paths >= 0, "benchmark.paths: must be >= 0 (0 = default)");
  require(c.benchmark_points >= 0, "benchmark.points: must be >= 0 (0 = default)");
  require(c.benchmark_span >= 0.0, "benchmark.span: must be >= 0 (0 = default)");
  return problems;
}

[[nodiscard]] inline ExperimentConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top-level document must be a JSON object");
  ExperimentConfig cfg;
  detail::ConfigBinder bind{cfg, doc, {}, {}};

  bind.string_field("dataset.benchmark", cfg.benchmark);
  bind.string_field("dataset.csv", cfg.csv_path);
  bind.int_field("benchmark.paths", cfg.benchmark_paths);
  bind.int_field("benchmark.points", cfg.benchmark_points);
  bind.real_field("benchmark.span", cfg.benchmark_span);
  bind.real_field("benchmark.noise", cfg.benchmark_noise);
  bind.int_field("library.degree", cfg.library_degree);
  bind.bool_field("library.trig", cfg.library_trig);
  bind.string_field("prior.kind", cfg.prior_kind);
  bind.real_field("prior.inclusion_prob", cfg.spike_slab.inclusion_prob);
  bind.real_field("prior.slab_sd", cfg.spike_slab.slab_sd);
  bind.real_field("prior.tau0", cfg.horseshoe.tau0);
  bind.real_field("prior.nu", cfg.horseshoe.nu);
  bind.real_field("prior.s", cfg.horseshoe.s);
  bind.real_field("pilot.rel_width", cfg.pilot_rel_width);
  bind.real_field("pilot.min_width", cfg.pilot_min_width);
  bind.real_field("pilot.strong_fraction", cfg.pilot_strong_fraction);
  bind.real_field("pilot.active_inclusion", cfg.pilot_active_inclusion);
  bind.real_field("pilot.inactive_inclusion", cfg.pilot_inactive_inclusion);
  bind.real_field("pilot.inactive_width", cfg.pilot_inactive_width);
  bind.real_field("pilot.threshold", cfg.pilot_threshold);
  bind.int_field("pilot.smooth_window", cfg.pilot_smooth_window);
  bind.real_field("pilot.ridge", cfg.pilot_ridge);
  bind.int_field("sampler.count", cfg.sampler_count);
  bind.real_field("sampler.min_acceptance", cfg.sampler_min_acceptance);
  bind.bool_field("bootstrap.enabled", cfg.bootstrap_enabled);
  bind.int_field("bootstrap.replicates", cfg.bootstrap_replicates);
  bind.int_field("bootstrap.block_length", cfg.bootstrap_block_length);
  bind.real_field("bootstrap.bandwidth", cfg.bootstrap_bandwidth);
  bind.int_field("integrator.substeps", cfg.integrator.substeps_per_interval);
  bind.real_field("integrator.blowup_threshold", cfg.integrator.blowup_threshold);
  bind.real_field("kde.data_bandwidth", cfg.kde_data_bandwidth);
  bind.real_field("kde.pushforward_bandwidth", cfg.kde_pushforward_bandwidth);
  bind.real_field("kde.data_bandwidth_scale", cfg.kde_data_bandwidth_scale);
  bind.real_field("kde.pushforward_bandwidth_scale", cfg.kde_pushforward_bandwidth_scale);
  bind.string_field("x0.policy", cfg.x0_policy);
  bind.int_field("x0.window", cfg.x0_window);
  bind.string_field("band.noise", cfg.band_noise);
  bind.int_field("noise.window", cfg.noise_window);
  bind.real_field("baseline.threshold", cfg.baseline.threshold);
  bind.int_field("baseline.max_iters", cfg.baseline.max_iters);
  bind.real_field("baseline.ridge", cfg.baseline.ridge);
  bind.string_field("baseline.derivative", cfg.baseline_derivative);
  bind.int_field("baseline.window", cfg.baseline_window);
  bind.real_field("select.inclusion_threshold", cfg.select_inclusion_threshold);
  bind.real_field("select.level", cfg.select_level);
  bind.int_field("seed", cfg.seed);
  bind.int_field("threads", cfg.threads);
  bind.string_field("out", cfg.out_dir);
  bind.int_field("report.truth_kl_samples", cfg.truth_kl_samples);

  std::vector<std::string> problems = std::move(bind.problems);
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    bool found = false;
    for (const auto& k : bind.known)
      if (k == key) {
        found = true;
        break;
      }
    if (!found) problems.push_back(key + ": unknown key");
  }
  if (!problems.empty()) {
    std::string msg = "config: invalid document";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

/// Flat echo of every result-affecting setting, used both for provenance and
/// as a template for new config files. The thread count is deliberately
/// absent: it may never change results, and result bundles must be
/// byte-identical across thread counts.
[[nodiscard]] inline Json config_to_json(const ExperimentConfig& c) {
  Json doc;
  doc["dataset.benchmark"] = c.benchmark;
  doc["dataset.csv"] = c.csv_path;
  doc["benchmark.paths"] = c.benchmark_paths;
  doc["benchmark.points"] = c.benchmark_points;
  doc["benchmark.span"] = c.benchmark_span;
  doc["benchmark.noise"] = c.benchmark_noise;
  doc["library.degree"] = c.library_degree;
  doc["library.trig"] = c.library_trig;
  doc["prior.kind"] = c.prior_kind;
  doc["prior.inclusion_prob"] = c.spike_slab.inclusion_prob;
  doc["prior.slab_sd"] = c.spike_slab.slab_sd;
  doc["prior.tau0"] = c.horseshoe.tau0;
  doc["prior.nu"] = c.horseshoe.nu;
  doc["prior.s"] = c.horseshoe.s;
  doc["pilot.rel_width"] = c.pilot_rel_width;
  doc["pilot.min_width"] = c.pilot_min_width;
  doc["pilot.strong_fraction"] = c.pilot_strong_fraction;
  doc["pilot.active_inclusion"] = c.pilot_active_inclusion;
  doc["pilot.inactive_inclusion"] = c.pilot_inactive_inclusion;
  doc["pilot.inactive_width"] = c.pilot_inactive_width;
  doc["pilot.threshold"] = c.pilot_threshold;
  doc["pilot.smooth_window"] = c.pilot_smooth_window;
  doc["pilot.ridge"] = c.pilot_ridge;
  doc["sampler.count"] = c.sampler_count;
  doc["sampler.min_acceptance"] = c.sampler_min_acceptance;
  doc["bootstrap.enabled"] = c.bootstrap_enabled;
  doc["bootstrap.replicates"] = c.bootstrap_replicates;
  doc["bootstrap.block_length"] = c.bootstrap_block_length;
  doc["bootstrap.bandwidth"] = c.bootstrap_bandwidth;
  doc["integrator.substeps"] = c.integrator.substeps_per_interval;
  doc["integrator.blowup_threshold"] = c.integrator.blowup_threshold;
  doc["kde.data_bandwidth"] = c.kde_data_bandwidth;
  doc["kde.pushforward_bandwidth"] = c.kde_pushforward_bandwidth;
  doc["kde.data_bandwidth_scale"] = c.kde_data_bandwidth_scale;
  doc["kde.pushforward_bandwidth_scale"] = c.kde_pushforward_bandwidth_scale;
  doc["x0.policy"] = c.x0_policy;
  doc["x0.window"] = c.x0_window;
  doc["band.noise"] = c.band_noise;
  doc["noise.window"] = c.noise_window;
  doc["baseline.threshold"] = c.baseline.threshold;
  doc["baseline.max_iters"] = c.baseline.max_iters;
  doc["baseline.ridge"] = c.baseline.ridge;
  doc["baseline.derivative"] = c.baseline_derivative;
  doc["baseline.window"] = c.baseline_window;
  doc["select.inclusion_threshold"] = c.select_inclusion_threshold;
  doc["select.level"] = c.select_level;
  doc["seed"] = c.seed;
  doc["out"] = c.out_dir;
  doc["report.truth_kl_samples"] = c.truth_kl_samples;
  return doc;
}

}  // namespace eqdisc
