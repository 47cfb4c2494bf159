#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "eqdisc/errors.hpp"

namespace eqdisc::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093453;

[[nodiscard]] inline double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf) dominates
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

/// Sample standard deviation (n-1 denominator) of every entry of a matrix.
[[nodiscard]] inline double sample_sd(const Eigen::MatrixXd& m) {
  const auto n = static_cast<double>(m.size());
  if (n < 2.0) return 0.0;
  const double mean = m.mean();
  const double ss = (m.array() - mean).square().sum();
  return std::sqrt(ss / (n - 1.0));
}

[[nodiscard]] inline double sample_sd(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  if (n < 2.0) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

/// Empirical quantile with linear interpolation between order statistics
/// (position q*(n-1), the common "type 7" rule).
[[nodiscard]] inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw ContractViolation("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractViolation("quantile: level must be in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
[[nodiscard]] inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// Lag-1 autocorrelation of a series.
[[nodiscard]] inline double lag1_autocorrelation(const Eigen::VectorXd& xs) {
  const Eigen::Index n = xs.size();
  if (n < 2) throw ContractViolation("lag1_autocorrelation: need at least 2 points");
  const double mean = xs.mean();
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = xs[i] - mean;
    den += d * d;
    if (i + 1 < n) num += d * (xs[i + 1] - mean);
  }
  return den == 0.0 ? 0.0 : num / den;
}

}  // namespace eqdisc::detail
