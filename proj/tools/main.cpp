// Command-line front end: benchmark generation, discovery runs, the STLSQ
// baseline, and result-directory comparison.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "eqdisc/eqdisc.hpp"

namespace {

namespace fs = std::filesystem;
using eqdisc::Json;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Override the master seed");
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--threads", flags.threads,
                  "Worker threads (affects speed only, never results; 0 = all cores)");
  cmd->add_flag("--verbose", flags.verbose, "Chatty progress on stderr");
}

void apply_common(eqdisc::ExperimentConfig& cfg, const CommonFlags& flags) {
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.threads) cfg.threads = *flags.threads;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw eqdisc::IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw eqdisc::IoError("failed while writing '" + path.string() + "'");
}

int run_generate(const std::string& name, std::uint64_t seed, const std::string& out_dir,
                 const eqdisc::BenchmarkOverrides& overrides, bool verbose) {
  const eqdisc::Benchmark bench = eqdisc::generate_benchmark(name, seed, overrides);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw eqdisc::IoError("cannot create '" + out_dir + "': " + ec.message());
  eqdisc::save_csv(bench.data, (fs::path(out_dir) / "dataset.csv").string());

  std::string truth_csv = "variable";
  for (const auto& term : bench.library.terms) truth_csv += "," + eqdisc::to_string(term);
  truth_csv += "\n";
  for (Eigen::Index j = 0; j < bench.truth.rows(); ++j) {
    truth_csv += eqdisc::variable_name(static_cast<int>(j));
    for (Eigen::Index k = 0; k < bench.truth.cols(); ++k)
      truth_csv += "," + eqdisc::detail::format_double(bench.truth(j, k));
    truth_csv += "\n";
  }
  write_text(fs::path(out_dir) / "truth.csv", truth_csv);

  Json meta;
  meta["benchmark"] = bench.name;
  meta["seed"] = bench.seed;
  meta["paths"] = bench.data.path_count();
  meta["state_dim"] = bench.data.state_dim();
  meta["points"] = bench.data.length();
  Json x0 = Json::array();
  for (Eigen::Index j = 0; j < bench.x0.size(); ++j) x0.push_back(bench.x0[j]);
  meta["x0"] = std::move(x0);
  Json terms = Json::array();
  for (const auto& term : bench.library.terms) terms.push_back(eqdisc::to_string(term));
  meta["library"] = std::move(terms);
  meta["equations"] = eqdisc::format_equations(bench.truth, bench.library);
  write_text(fs::path(out_dir) / "benchmark.json", meta.dump(2) + "\n");

  if (verbose)
    std::cerr << "generated " << bench.data.path_count() << " path(s), " << bench.data.length()
              << " points -> " << out_dir << "\n";
  std::cout << "wrote " << (fs::path(out_dir) / "dataset.csv").string() << "\n";
  return 0;
}

int run_discover(const std::string& config_path, const CommonFlags& flags) {
  eqdisc::ExperimentConfig cfg = eqdisc::load_config(config_path);
  apply_common(cfg, flags);
  if (flags.verbose) std::cerr << "running discovery with seed " << cfg.seed << "...\n";
  const eqdisc::ResultBundle bundle = eqdisc::run_experiment(cfg);
  const auto manifest = eqdisc::save_results(bundle, cfg.out_dir);

  std::cout << "recovered model:\n";
  for (const auto& eq : bundle.equations) std::cout << "  " << eq << "\n";
  std::cout << "acceptance rate: " << bundle.ensemble.acceptance_rate * 100.0 << "%\n";
  std::cout << "band coverage:   " << bundle.band_coverage * 100.0 << "%\n";
  if (bundle.rmse_posterior_mean)
    std::cout << "rmse (posterior mean / baseline): " << *bundle.rmse_posterior_mean << " / "
              << *bundle.rmse_baseline << "\n";
  if (bundle.truth_kl_mean) std::cout << "truth KL (mean): " << *bundle.truth_kl_mean << "\n";
  std::cout << "wrote " << manifest.size() + 1 << " files to " << cfg.out_dir << "\n";
  return 0;
}

int run_baseline(const std::string& config_path, const CommonFlags& flags) {
  eqdisc::ExperimentConfig cfg = eqdisc::load_config(config_path);
  apply_common(cfg, flags);
  const auto problems = eqdisc::validate(cfg);
  if (!problems.empty()) {
    std::string msg = "config: validation failed";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw eqdisc::ConfigError(msg);
  }
  eqdisc::Dataset data;
  std::optional<eqdisc::CoefficientMatrix> truth;
  if (!cfg.csv_path.empty()) {
    data = eqdisc::load_csv(cfg.csv_path);
  } else {
    eqdisc::BenchmarkOverrides ov;
    if (cfg.benchmark_paths > 0) ov.path_count = cfg.benchmark_paths;
    if (cfg.benchmark_points > 0) ov.n_points = cfg.benchmark_points;
    if (cfg.benchmark_span > 0.0) ov.t_end = cfg.benchmark_span;
    if (cfg.benchmark_noise >= 0.0) ov.noise_level = cfg.benchmark_noise;
    eqdisc::Benchmark bench =
        eqdisc::generate_benchmark(cfg.benchmark, eqdisc::sub_seed(cfg.seed, 11), ov);
    truth = std::move(bench.truth);
    data = std::move(bench.data);
  }
  const eqdisc::TermLibrary lib =
      eqdisc::build_library(static_cast<int>(data.state_dim()), cfg.library_degree, cfg.library_trig);
  const auto method = cfg.baseline_derivative == "smoothed"
                          ? eqdisc::DerivativeMethod::smoothed_difference
                          : eqdisc::DerivativeMethod::central_difference;
  const eqdisc::CoefficientMatrix coeffs =
      eqdisc::fit_baseline(data, lib, method, cfg.baseline_window, cfg.baseline);

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw eqdisc::IoError("cannot create '" + cfg.out_dir + "': " + ec.message());
  write_text(fs::path(cfg.out_dir) / "baseline_coefficients.csv",
             eqdisc::detail::coefficients_csv(coeffs, lib));
  Json summary;
  summary["config"] = eqdisc::config_to_json(cfg);
  summary["equations"] = eqdisc::format_equations(coeffs, lib);
  if (truth && truth->rows() == coeffs.rows() && truth->cols() == coeffs.cols())
    summary["rmse"] = eqdisc::coefficient_rmse(coeffs, *truth);
  write_text(fs::path(cfg.out_dir) / "baseline_summary.json", summary.dump(2) + "\n");

  for (const auto& eq : eqdisc::format_equations(coeffs, lib)) std::cout << "  " << eq << "\n";
  std::cout << "wrote baseline results to " << cfg.out_dir << "\n";
  return 0;
}

[[nodiscard]] Json load_summary(const std::string& dir) {
  const fs::path path = fs::path(dir) / "summary.json";
  std::ifstream in(path);
  if (!in) throw eqdisc::IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw eqdisc::IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::string cell(const Json& doc, const char* outer, const char* inner) {
  if (!doc.contains(outer) || doc[outer].is_null()) return "n/a";
  const Json& node = doc[outer];
  if (inner == nullptr) return node.dump();
  if (!node.contains(inner) || node[inner].is_null()) return "n/a";
  return node[inner].dump();
}

int run_compare(const std::string& dir_a, const std::string& dir_b,
                const std::optional<std::string>& out_file) {
  const Json a = load_summary(dir_a);
  const Json b = load_summary(dir_b);
  struct Row {
    const char* label;
    const char* outer;
    const char* inner;
  };
  const Row rows[] = {
      {"acceptance_rate", "acceptance_rate", nullptr},
      {"band_coverage", "band_coverage", nullptr},
      {"rmse_posterior_mean", "rmse", "posterior_mean"},
      {"rmse_selected", "rmse", "selected"},
      {"rmse_baseline", "rmse", "baseline"},
      {"kl_data_vs_prior_pushforward", "diagnostics", "kl_data_vs_prior_pushforward"},
      {"kl_data_vs_posterior_pushforward", "diagnostics", "kl_data_vs_posterior_pushforward"},
      {"truth_kl_mean", "diagnostics", "truth_kl_mean"},
  };
  std::string csv = "metric,a,b\n";
  std::printf("%-36s %-22s %-22s\n", "metric", dir_a.c_str(), dir_b.c_str());
  for (const auto& row : rows) {
    const std::string va = cell(a, row.outer, row.inner);
    const std::string vb = cell(b, row.outer, row.inner);
    std::printf("%-36s %-22s %-22s\n", row.label, va.c_str(), vb.c_str());
    csv += std::string(row.label) + "," + va + "," + vb + "\n";
  }
  if (out_file) write_text(*out_file, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equation discovery for noisy, variable dynamical systems"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "Write a named synthetic benchmark as CSV");
  std::string gen_name;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "benchmark";
  eqdisc::BenchmarkOverrides overrides;
  bool gen_verbose = false;
  long long gen_paths = 0, gen_points = 0;
  double gen_span = 0.0, gen_noise = -1.0;
  generate->add_option("--name", gen_name, "lv_multi | lv_single | lorenz")->required();
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output directory");
  generate->add_option("--paths", gen_paths, "Override path count (lv_multi)");
  generate->add_option("--points", gen_points, "Override points per path");
  generate->add_option("--span", gen_span, "Override time span");
  generate->add_option("--noise", gen_noise, "Override noise level");
  generate->add_flag("--verbose", gen_verbose, "Chatty progress on stderr");

  // discover
  auto* discover = app.add_subcommand("discover", "Run the full discovery pipeline from a config");
  std::string discover_config;
  CommonFlags discover_flags;
  discover->add_option("--config", discover_config, "JSON config file")->required();
  add_common(discover, discover_flags);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run only the STLSQ baseline from a config");
  std::string baseline_config;
  CommonFlags baseline_flags;
  baseline->add_option("--config", baseline_config, "JSON config file")->required();
  add_common(baseline, baseline_flags);

  // compare
  auto* compare = app.add_subcommand("compare", "Tabulate RMSE/KL metrics of two result dirs");
  std::string cmp_a, cmp_b;
  std::optional<std::string> cmp_out;
  compare->add_option("--a", cmp_a, "First result directory")->required();
  compare->add_option("--b", cmp_b, "Second result directory")->required();
  compare->add_option("--out", cmp_out, "Also write comparison.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) {
      if (gen_paths > 0) overrides.path_count = gen_paths;
      if (gen_points > 0) overrides.n_points = gen_points;
      if (gen_span > 0.0) overrides.t_end = gen_span;
      if (gen_noise >= 0.0) overrides.noise_level = gen_noise;
      return run_generate(gen_name, gen_seed, gen_out, overrides, gen_verbose);
    }
    if (*discover) return run_discover(discover_config, discover_flags);
    if (*baseline) return run_baseline(baseline_config, baseline_flags);
    if (*compare) return run_compare(cmp_a, cmp_b, cmp_out);
  } catch (const eqdisc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const eqdisc::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const eqdisc::InferenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const eqdisc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
