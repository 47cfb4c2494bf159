#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "eqdisc/core.hpp"

namespace eqdisc {

/// Sequentially thresholded least squares settings.
struct StlsqConfig {
  double threshold = 0.05;
  int max_iters = 20;
  double ridge = 0.0;
};

enum class DerivativeMethod { central_difference, smoothed_difference };

namespace detail {

// Derivative of the quadratic through (ta,ya), (tb,yb), (tc,yc) at time t.
[[nodiscard]] inline double quadratic_derivative(double ta, double ya, double tb, double yb,
                                                 double tc, double yc, double t) {
  return ya * (2.0 * t - tb - tc) / ((ta - tb) * (ta - tc)) +
         yb * (2.0 * t - ta - tc) / ((tb - ta) * (tb - tc)) +
         yc * (2.0 * t - ta - tb) / ((tc - ta) * (tc - tb));
}

[[nodiscard]] inline Matrix moving_average(const Matrix& values, int window) {
  const Eigen::Index n = values.cols();
  const int half = window / 2;
  Matrix out(values.rows(), n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + half);
    out.col(t) = values.middleCols(lo, hi - lo + 1).rowwise().mean();
  }
  return out;
}

}  // namespace detail

/// Second-order finite differences per path: three-point interior stencils
/// plus one-sided second-order ends. The smoothed variant applies a
/// moving-average prefilter of odd window length first.
[[nodiscard]] inline std::vector<Matrix> estimate_derivatives(const Dataset& data,
                                                              DerivativeMethod method,
                                                              int smooth_window = 5) {
  if (data.length() < 3) throw ContractViolation("estimate_derivatives: need at least 3 points");
  if (method == DerivativeMethod::smoothed_difference &&
      (smooth_window < 1 || smooth_window % 2 == 0))
    throw ContractViolation("estimate_derivatives: smoothing window must be odd and positive");
  std::vector<Matrix> out;
  out.reserve(data.paths.size());
  const Vector& t = data.times();
  const Eigen::Index n = data.length();
  for (const auto& path : data.paths) {
    const Matrix values = method == DerivativeMethod::smoothed_difference
                              ? detail::moving_average(path.values, smooth_window)
                              : path.values;
    Matrix d(values.rows(), n);
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
      d(j, 0) = detail::quadratic_derivative(t[0], values(j, 0), t[1], values(j, 1), t[2],
                                             values(j, 2), t[0]);
      for (Eigen::Index i = 1; i + 1 < n; ++i)
        d(j, i) = detail::quadratic_derivative(t[i - 1], values(j, i - 1), t[i], values(j, i),
                                               t[i + 1], values(j, i + 1), t[i]);
      d(j, n - 1) = detail::quadratic_derivative(t[n - 3], values(j, n - 3), t[n - 2],
                                                 values(j, n - 2), t[n - 1], values(j, n - 1),
                                                 t[n - 1]);
    }
    out.push_back(std::move(d));
  }
  return out;
}

namespace detail {

[[nodiscard]] inline Vector solve_least_squares(const Matrix& a, const Vector& b, double ridge,
                                                const std::vector<Eigen::Index>& column_ids) {
  if (ridge > 0.0) {
    Matrix normal = a.transpose() * a;
    normal.diagonal().array() += ridge;
    return normal.ldlt().solve(a.transpose() * b);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < a.cols()) {
    const auto perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index i = qr.rank(); i < a.cols(); ++i) {
      if (!names.empty()) names += ", ";
      names += std::to_string(column_ids[static_cast<std::size_t>(perm[i])]);
    }
    throw ContractViolation("stlsq: rank-deficient survivor set; colinear columns {" + names +
                            "} (add ridge or drop terms)");
  }
  return qr.solve(b);
}

}  // namespace detail

/// Iterate { least squares, zero coefficients below the threshold, re-fit on
/// survivors } until a fixed point or max_iters. Zeroed coefficients stay
/// zero. One regression per state variable (column of xdot).
[[nodiscard]] inline CoefficientMatrix stlsq(const Matrix& theta, const Matrix& xdot,
                                             const StlsqConfig& cfg) {
  if (cfg.threshold < 0.0) throw ContractViolation("stlsq: threshold must be >= 0");
  if (cfg.max_iters < 1) throw ContractViolation("stlsq: max_iters must be >= 1");
  if (cfg.ridge < 0.0) throw ContractViolation("stlsq: ridge must be >= 0");
  if (theta.rows() != xdot.rows()) throw ContractViolation("stlsq: row counts disagree");
  if (theta.rows() < theta.cols())
    throw ContractViolation("stlsq: need at least as many rows as candidate terms");
  if (!theta.allFinite() || !xdot.allFinite())
    throw ContractViolation("stlsq: non-finite entries");

  const Eigen::Index m = theta.cols();
  const Eigen::Index p = xdot.cols();
  CoefficientMatrix out = CoefficientMatrix::Zero(p, m);

  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<Eigen::Index> active(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) active[static_cast<std::size_t>(k)] = k;
    const Vector target = xdot.col(j);
    for (int iter = 0; iter < cfg.max_iters && !active.empty(); ++iter) {
      Matrix sub(theta.rows(), static_cast<Eigen::Index>(active.size()));
      for (std::size_t c = 0; c < active.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = theta.col(active[c]);
      const Vector coef = detail::solve_least_squares(sub, target, cfg.ridge, active);
      std::vector<Eigen::Index> survivors;
      survivors.reserve(active.size());
      for (std::size_t c = 0; c < active.size(); ++c)
        if (std::abs(coef[static_cast<Eigen::Index>(c)]) >= cfg.threshold)
          survivors.push_back(active[c]);
      if (survivors.size() == active.size() || iter + 1 == cfg.max_iters) {
        // Fixed point (or iteration cap): keep the surviving coefficients.
        if (survivors.size() == active.size()) {
          for (std::size_t c = 0; c < active.size(); ++c) out(j, active[c]) = coef[static_cast<Eigen::Index>(c)];
        } else if (!survivors.empty()) {
          Matrix final_sub(theta.rows(), static_cast<Eigen::Index>(survivors.size()));
          for (std::size_t c = 0; c < survivors.size(); ++c)
            final_sub.col(static_cast<Eigen::Index>(c)) = theta.col(survivors[c]);
          const Vector final_coef =
              detail::solve_least_squares(final_sub, target, cfg.ridge, survivors);
          for (std::size_t c = 0; c < survivors.size(); ++c)
            out(j, survivors[c]) = final_coef[static_cast<Eigen::Index>(c)];
        }
        break;
      }
      active = std::move(survivors);
    }
  }
  return out;
}

/// Convenience wrapper: stack all paths row-wise, evaluate the library along
/// the data, regress finite-difference derivatives on it.
[[nodiscard]] inline CoefficientMatrix fit_baseline(const Dataset& data, const TermLibrary& lib,
                                                    DerivativeMethod method, int smooth_window,
                                                    const StlsqConfig& cfg) {
  const std::vector<Matrix> derivs = estimate_derivatives(data, method, smooth_window);
  const Eigen::Index n = data.length();
  const Eigen::Index rows = data.path_count() * n;
  Matrix theta(rows, lib.size());
  Matrix targets(rows, data.state_dim());
  Vector term_values(lib.size());
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < data.path_count(); ++i) {
    const auto& path = data.paths[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < n; ++t, ++row) {
      eval_terms_into(lib, path.values.col(t), term_values);
      theta.row(row) = term_values;
      targets.row(row) = derivs[static_cast<std::size_t>(i)].col(t);
    }
  }
  return stlsq(theta, targets, cfg);
}

}  // namespace eqdisc
