#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "eqdisc/detail/hash.hpp"
#include "eqdisc/experiment.hpp"

namespace eqdisc {

struct ManifestEntry {
  std::string path;  // relative to the result directory
  std::uint64_t bytes = 0;
  std::string fnv1a64;
};

namespace detail {

[[nodiscard]] inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(j, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[nodiscard]] inline std::string sanitize_term(std::string term) {
  for (char& c : term) {
    if (c == '*') c = '_';
    if (c == '^') c = 'p';
    if (c == '(' || c == ')') c = '-';
  }
  return term;
}

}  // namespace detail

/// Serialize every scalar result of a run into one ordered JSON document.
[[nodiscard]] inline Json summary_to_json(const ResultBundle& bundle) {
  Json doc;
  doc["config"] = config_to_json(bundle.config);
  doc["dataset"] = {{"paths", bundle.path_count},
                    {"state_dim", bundle.state_dim},
                    {"points", bundle.point_count}};
  Json terms = Json::array();
  for (const auto& term : bundle.library.terms) terms.push_back(to_string(term));
  doc["library"] = std::move(terms);
  doc["acceptance_rate"] = bundle.ensemble.acceptance_rate;
  doc["accepted_samples"] = bundle.ensemble.accepted.size();
  doc["diverged_prior_samples"] = bundle.ensemble.diverged_count;

  Json active = Json::array();
  for (const auto& [j, k] : bundle.selected.active) {
    Json entry;
    entry["variable"] = variable_name(static_cast<int>(j));
    entry["term"] = to_string(bundle.library.terms[static_cast<std::size_t>(k)]);
    entry["mean"] = bundle.selected.summary.mean(j, k);
    entry["sd"] = bundle.selected.summary.sd(j, k);
    entry["lower"] = bundle.selected.summary.lower(j, k);
    entry["upper"] = bundle.selected.summary.upper(j, k);
    entry["inclusion"] = bundle.selected.summary.inclusion(j, k);
    active.push_back(std::move(entry));
  }
  doc["selected"] = {{"active", std::move(active)}, {"equations", bundle.equations}};

  doc["posterior"] = {{"mean", detail::matrix_to_json(bundle.summary.mean)},
                      {"sd", detail::matrix_to_json(bundle.summary.sd)},
                      {"lower", detail::matrix_to_json(bundle.summary.lower)},
                      {"upper", detail::matrix_to_json(bundle.summary.upper)},
                      {"inclusion", detail::matrix_to_json(bundle.summary.inclusion)},
                      {"level", bundle.summary.level}};
  doc["baseline"] = {{"coefficients", detail::matrix_to_json(bundle.baseline_coefficients)},
                     {"equations", bundle.baseline_equations}};
  doc["band_coverage"] = bundle.band_coverage;
  doc["band_diverged_members"] = bundle.band.diverged_members;

  Json diag;
  diag["kl_data_vs_prior_pushforward"] = bundle.kl_data_vs_prior_pushforward;
  diag["kl_data_vs_posterior_pushforward"] = bundle.kl_data_vs_posterior_pushforward;
  if (bundle.truth_kl_mean)
    diag["truth_kl_mean"] = *bundle.truth_kl_mean;
  else
    diag["truth_kl_mean"] = nullptr;
  Json per_coef = Json::array();
  for (const auto& [jk, kl] : bundle.truth_kl_per_coefficient) {
    Json entry;
    entry["variable"] = variable_name(static_cast<int>(jk.first));
    entry["term"] = to_string(bundle.library.terms[static_cast<std::size_t>(jk.second)]);
    entry["kl"] = kl;
    per_coef.push_back(std::move(entry));
  }
  diag["truth_kl_per_coefficient"] = std::move(per_coef);
  doc["diagnostics"] = std::move(diag);

  Json rmse;
  rmse["posterior_mean"] = bundle.rmse_posterior_mean ? Json(*bundle.rmse_posterior_mean) : Json(nullptr);
  rmse["selected"] = bundle.rmse_selected ? Json(*bundle.rmse_selected) : Json(nullptr);
  rmse["baseline"] = bundle.rmse_baseline ? Json(*bundle.rmse_baseline) : Json(nullptr);
  doc["rmse"] = std::move(rmse);
  doc["truth"] = bundle.truth ? detail::matrix_to_json(*bundle.truth) : Json(nullptr);
  doc["seed"] = bundle.config.seed;
  return doc;
}

namespace detail {

[[nodiscard]] inline std::string posterior_samples_csv(const ResultBundle& bundle) {
  std::string out = "sample";
  const Eigen::Index p = bundle.summary.mean.rows();
  const Eigen::Index m = bundle.summary.mean.cols();
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = 0; k < m; ++k)
      out += ",l_" + std::to_string(j + 1) + "_" + std::to_string(k + 1);
  out += "\n";
  for (std::size_t i = 0; i < bundle.ensemble.accepted.size(); ++i) {
    out += std::to_string(bundle.ensemble.accepted_indices[i]);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = 0; k < m; ++k)
        out += "," + format_double(bundle.ensemble.accepted[i](j, k));
    out += "\n";
  }
  return out;
}

[[nodiscard]] inline std::string band_csv(const ResultBundle& bundle) {
  std::string out = "variable,t,lower,mean,upper\n";
  for (Eigen::Index j = 0; j < bundle.band.mean.rows(); ++j)
    for (Eigen::Index t = 0; t < bundle.band.mean.cols(); ++t)
      out += variable_name(static_cast<int>(j)) + "," + format_double(bundle.band.times[t]) + "," +
             format_double(bundle.band.lower(j, t)) + "," + format_double(bundle.band.mean(j, t)) +
             "," + format_double(bundle.band.upper(j, t)) + "\n";
  return out;
}

[[nodiscard]] inline std::string coefficients_csv(const CoefficientMatrix& coeffs,
                                                  const TermLibrary& lib) {
  std::string out = "variable";
  for (const auto& term : lib.terms) out += "," + to_string(term);
  out += "\n";
  for (Eigen::Index j = 0; j < coeffs.rows(); ++j) {
    out += variable_name(static_cast<int>(j));
    for (Eigen::Index k = 0; k < coeffs.cols(); ++k) out += "," + format_double(coeffs(j, k));
    out += "\n";
  }
  return out;
}

}  // namespace detail

/// Write summary.json, the posterior sample table, the predictive-band table,
/// baseline coefficients and per-term histogram files, then a manifest with a
/// checksum for each file.
inline std::vector<ManifestEntry> save_results(const ResultBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "histograms", ec);
  if (ec) throw IoError("save_results: cannot create '" + dir + "': " + ec.message());

  std::vector<ManifestEntry> manifest;
  const auto write_file = [&](const std::string& rel, const std::string& content) {
    const fs::path full = fs::path(dir) / rel;
    std::ofstream out(full, std::ios::binary);
    if (!out) throw IoError("save_results: cannot open '" + full.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("save_results: failed while writing '" + full.string() + "'");
    manifest.push_back({rel, content.size(), detail::fnv1a64_hex(content)});
  };

  write_file("summary.json", summary_to_json(bundle).dump(2) + "\n");
  write_file("posterior_samples.csv", detail::posterior_samples_csv(bundle));
  write_file("predictive_band.csv", detail::band_csv(bundle));
  write_file("baseline_coefficients.csv",
             detail::coefficients_csv(bundle.baseline_coefficients, bundle.library));
  for (const auto& [j, k] : bundle.selected.active) {
    const std::string term = to_string(bundle.library.terms[static_cast<std::size_t>(k)]);
    std::string content = variable_name(static_cast<int>(j)) + ":" + term + "\n";
    for (const auto& sample : bundle.ensemble.accepted)
      content += detail::format_double(sample(j, k)) + "\n";
    write_file("histograms/" + variable_name(static_cast<int>(j)) + "_" +
                   detail::sanitize_term(term) + ".csv",
               content);
  }

  Json mf = Json::array();
  for (const auto& entry : manifest)
    mf.push_back({{"path", entry.path}, {"bytes", entry.bytes}, {"fnv1a64", entry.fnv1a64}});
  const fs::path mpath = fs::path(dir) / "manifest.json";
  std::ofstream mout(mpath, std::ios::binary);
  if (!mout) throw IoError("save_results: cannot open '" + mpath.string() + "' for writing");
  const std::string mcontent = mf.dump(2) + "\n";
  mout.write(mcontent.data(), static_cast<std::streamsize>(mcontent.size()));
  if (!mout) throw IoError("save_results: failed while writing '" + mpath.string() + "'");
  return manifest;
}

}  // namespace eqdisc
