#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "eqdisc/core.hpp"
#include "eqdisc/detail/stats.hpp"

namespace eqdisc {

/// Log-scale density value; -inf is a legal value, NaN never is.
struct LogDensity {
  double value = detail::kNegInf;
};

/// Per-state-variable trajectory-space Gaussian KDE: each reference
/// trajectory is a point in n-dimensional space with one scalar bandwidth per
/// variable; variables combine as a product of KDEs.
struct KdeModel {
  std::vector<Matrix> references;  // per variable: r x n
  Vector bandwidths;               // per variable

  [[nodiscard]] Eigen::Index state_dim() const {
    return static_cast<Eigen::Index>(references.size());
  }
  [[nodiscard]] Eigen::Index reference_count() const { return references.front().rows(); }
  [[nodiscard]] Eigen::Index length() const { return references.front().cols(); }
};

/// Fit one KDE per state variable. Default bandwidth follows Scott's rule on
/// the trajectory dimension, h_j = sd_j * r^{-1/(n+4)}, with sd_j the pooled
/// standard deviation of variable j's values; an override replaces every h_j.
[[nodiscard]] inline KdeModel fit_kde(const Dataset& data,
                                      std::optional<double> bandwidth_override = std::nullopt) {
  if (bandwidth_override && !(*bandwidth_override > 0.0))
    throw ContractViolation("fit_kde: bandwidth override must be > 0");
  const Eigen::Index r = data.path_count();
  const Eigen::Index n = data.length();
  const Eigen::Index p = data.state_dim();
  KdeModel model;
  model.references.resize(static_cast<std::size_t>(p));
  model.bandwidths.resize(p);
  const double scott = std::pow(static_cast<double>(r), -1.0 / static_cast<double>(n + 4));
  for (Eigen::Index j = 0; j < p; ++j) {
    Matrix refs(r, n);
    for (Eigen::Index i = 0; i < r; ++i) refs.row(i) = data.paths[static_cast<std::size_t>(i)].values.row(j);
    if (bandwidth_override) {
      model.bandwidths[j] = *bandwidth_override;
    } else {
      const double sd = detail::sample_sd(refs);
      if (!(sd > 0.0))
        throw InferenceError("fit_kde: variable " + std::to_string(j + 1) +
                             " has zero pooled variance; set the bandwidth manually");
      model.bandwidths[j] = sd * scott;
    }
    model.references[static_cast<std::size_t>(j)] = std::move(refs);
  }
  return model;
}

/// Log of the product over variables of (1/r) sum_i N(||query_j - ref_ij||; h_j)
/// with the full Gaussian normalizer, evaluated with log-sum-exp.
[[nodiscard]] inline LogDensity kde_log_likelihood(const KdeModel& model, const SamplePath& query) {
  if (query.state_dim() != model.state_dim())
    throw ContractViolation("kde_log_likelihood: state dimension mismatch");
  if (query.length() != model.length())
    throw ContractViolation("kde_log_likelihood: trajectory length does not match model");
  const auto n = static_cast<double>(model.length());
  const auto r = static_cast<double>(model.reference_count());
  double total = 0.0;
  for (Eigen::Index j = 0; j < model.state_dim(); ++j) {
    const Matrix& refs = model.references[static_cast<std::size_t>(j)];
    const double h = model.bandwidths[j];
    const Vector sq = (refs.rowwise() - query.values.row(j)).rowwise().squaredNorm();
    const Vector exponents = -sq / (2.0 * h * h);
    total += detail::log_sum_exp(exponents) - std::log(r) -
             0.5 * n * detail::kLogTwoPi - n * std::log(h);
  }
  if (std::isnan(total)) return {detail::kNegInf};
  return {total};
}

namespace detail {

[[nodiscard]] inline double log_kde_1d(double x, const std::vector<double>& refs, double h) {
  double best = kNegInf;
  for (double ref : refs) {
    const double d = (x - ref) / h;
    best = std::max(best, -0.5 * d * d);
  }
  if (!std::isfinite(best)) return kNegInf;
  double s = 0.0;
  for (double ref : refs) {
    const double d = (x - ref) / h;
    s += std::exp(-0.5 * d * d - best);
  }
  return best + std::log(s) - std::log(static_cast<double>(refs.size())) - 0.5 * kLogTwoPi -
         std::log(h);
}

[[nodiscard]] inline double scott_1d(const std::vector<double>& xs) {
  const double sd = sample_sd(xs);
  const double safe = sd > 0.0 ? sd : 1e-12;
  return safe * std::pow(static_cast<double>(xs.size()), -0.2);
}

}  // namespace detail

/// Plug-in KL estimate: per coordinate, Gaussian KDEs are fitted to each
/// sample set and mean(log p - log q) is taken over the P samples, floored at
/// zero; coordinates are averaged. A diagnostic, not part of inference.
[[nodiscard]] inline double estimate_kl(const std::vector<Vector>& samples_p,
                                        const std::vector<Vector>& samples_q) {
  if (samples_p.empty() || samples_q.empty())
    throw ContractViolation("estimate_kl: both sample sets must be non-empty");
  const Eigen::Index dim = samples_p.front().size();
  for (const auto& v : samples_p)
    if (v.size() != dim) throw ContractViolation("estimate_kl: ragged samples in P");
  for (const auto& v : samples_q)
    if (v.size() != dim) throw ContractViolation("estimate_kl: dimension mismatch between P and Q");

  double total = 0.0;
  std::vector<double> xs_p(samples_p.size()), xs_q(samples_q.size());
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < samples_p.size(); ++i) xs_p[i] = samples_p[i][c];
    for (std::size_t i = 0; i < samples_q.size(); ++i) xs_q[i] = samples_q[i][c];
    const double hp = detail::scott_1d(xs_p);
    const double hq = detail::scott_1d(xs_q);
    double acc = 0.0;
    for (double x : xs_p) acc += detail::log_kde_1d(x, xs_p, hp) - detail::log_kde_1d(x, xs_q, hq);
    acc /= static_cast<double>(xs_p.size());
    total += std::max(acc, 0.0);
  }
  return total / static_cast<double>(dim);
}

}  // namespace eqdisc
