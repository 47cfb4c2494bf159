#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eqdisc/errors.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// p x m coefficient matrix paired with a TermLibrary; row j holds the
/// coefficients of state variable j's equation.
using CoefficientMatrix = Eigen::MatrixXd;

/// One observed or simulated trajectory: a strictly increasing time grid and
/// a p x n matrix of state values.
struct SamplePath {
  Vector times;
  Matrix values;

  SamplePath() = default;

  SamplePath(Vector t, Matrix v) : times(std::move(t)), values(std::move(v)) {
    if (times.size() < 1 || values.cols() != times.size() || values.rows() < 1)
      throw ContractViolation("SamplePath: values must be p x n with n == times.size() >= 1");
    for (Eigen::Index i = 0; i + 1 < times.size(); ++i)
      if (!(times[i] < times[i + 1]))
        throw ContractViolation("SamplePath: times must be strictly increasing");
    if (!times.allFinite() || !values.allFinite())
      throw ContractViolation("SamplePath: non-finite entry");
  }

  [[nodiscard]] Eigen::Index state_dim() const { return values.rows(); }
  [[nodiscard]] Eigen::Index length() const { return times.size(); }
};

/// A set of sample paths sharing one time grid (and one state dimension).
struct Dataset {
  std::vector<SamplePath> paths;

  Dataset() = default;

  explicit Dataset(std::vector<SamplePath> p) : paths(std::move(p)) {
    if (paths.empty()) throw ContractViolation("Dataset: needs at least one path");
    const auto& first = paths.front();
    for (std::size_t i = 1; i < paths.size(); ++i) {
      if (paths[i].state_dim() != first.state_dim())
        throw ContractViolation("Dataset: paths disagree on state dimension");
      if (paths[i].times.size() != first.times.size() ||
          (paths[i].times.array() != first.times.array()).any())
        throw ContractViolation("Dataset: all paths must share one time grid");
    }
  }

  [[nodiscard]] Eigen::Index path_count() const { return static_cast<Eigen::Index>(paths.size()); }
  [[nodiscard]] Eigen::Index state_dim() const { return paths.front().state_dim(); }
  [[nodiscard]] Eigen::Index length() const { return paths.front().length(); }
  [[nodiscard]] const Vector& times() const { return paths.front().times; }
};

/// One candidate basis function: a constant, a monomial over the state
/// variables, or sin/cos of a single variable.
struct TermDescriptor {
  enum class Kind { constant, monomial, sine, cosine };

  Kind kind = Kind::constant;
  std::vector<int> exponents;  // monomial only; length p, nonnegative
  int variable = -1;           // sine/cosine only; index < p

  friend bool operator==(const TermDescriptor&, const TermDescriptor&) = default;

  [[nodiscard]] int degree() const {
    if (kind != Kind::monomial) return 0;
    int d = 0;
    for (int e : exponents) d += e;
    return d;
  }
};

[[nodiscard]] inline std::string variable_name(int index) { return "x" + std::to_string(index + 1); }

[[nodiscard]] inline std::string to_string(const TermDescriptor& term) {
  switch (term.kind) {
    case TermDescriptor::Kind::constant:
      return "1";
    case TermDescriptor::Kind::sine:
      return "sin(" + variable_name(term.variable) + ")";
    case TermDescriptor::Kind::cosine:
      return "cos(" + variable_name(term.variable) + ")";
    case TermDescriptor::Kind::monomial: {
      std::string out;
      for (std::size_t v = 0; v < term.exponents.size(); ++v) {
        const int e = term.exponents[v];
        if (e == 0) continue;
        if (!out.empty()) out += "*";
        out += variable_name(static_cast<int>(v));
        if (e > 1) out += "^" + std::to_string(e);
      }
      return out.empty() ? "1" : out;
    }
  }
  return "?";
}

/// Ordered candidate-term library for a p-dimensional system.
struct TermLibrary {
  std::vector<TermDescriptor> terms;
  int state_dim = 0;

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(terms.size()); }
};

namespace detail {

// Exponent vectors of total degree `degree`, first variable varying slowest
// and descending, so [2,0] precedes [1,1] precedes [0,2].
inline void emit_monomials(int degree, int pos, int p, std::vector<int>& current,
                           std::vector<TermDescriptor>& out) {
  if (pos == p - 1) {
    current[pos] = degree;
    out.push_back({TermDescriptor::Kind::monomial, current, -1});
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[pos] = e;
    emit_monomials(degree - e, pos + 1, p, current, out);
  }
}

}  // namespace detail

/// All monomials of total degree <= poly_degree (constant included) in graded
/// lexicographic order, optionally followed by sin/cos of each variable.
[[nodiscard]] inline TermLibrary build_library(int state_dim, int poly_degree, bool include_trig) {
  if (state_dim < 1) throw ContractViolation("build_library: state_dim must be >= 1");
  if (poly_degree < 0) throw ContractViolation("build_library: poly_degree must be >= 0");
  TermLibrary lib;
  lib.state_dim = state_dim;
  lib.terms.push_back({TermDescriptor::Kind::constant, {}, -1});
  std::vector<int> scratch(static_cast<std::size_t>(state_dim), 0);
  for (int d = 1; d <= poly_degree; ++d)
    detail::emit_monomials(d, 0, state_dim, scratch, lib.terms);
  if (include_trig) {
    for (int v = 0; v < state_dim; ++v)
      lib.terms.push_back({TermDescriptor::Kind::sine, {}, v});
    for (int v = 0; v < state_dim; ++v)
      lib.terms.push_back({TermDescriptor::Kind::cosine, {}, v});
  }
  return lib;
}

namespace detail {

[[nodiscard]] inline double pow_int(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

}  // namespace detail

/// Evaluate every library term at one state; writes into a preallocated
/// vector so the integrator's inner loop stays allocation-free.
inline void eval_terms_into(const TermLibrary& lib, const Eigen::Ref<const Vector>& state,
                            Vector& out) {
  for (Eigen::Index k = 0; k < lib.size(); ++k) {
    const auto& term = lib.terms[static_cast<std::size_t>(k)];
    switch (term.kind) {
      case TermDescriptor::Kind::constant:
        out[k] = 1.0;
        break;
      case TermDescriptor::Kind::monomial: {
        double v = 1.0;
        for (std::size_t j = 0; j < term.exponents.size(); ++j)
          v *= detail::pow_int(state[static_cast<Eigen::Index>(j)], term.exponents[j]);
        out[k] = v;
        break;
      }
      case TermDescriptor::Kind::sine:
        out[k] = std::sin(state[term.variable]);
        break;
      case TermDescriptor::Kind::cosine:
        out[k] = std::cos(state[term.variable]);
        break;
    }
  }
}

[[nodiscard]] inline Vector eval_terms(const TermLibrary& lib,
                                       const Eigen::Ref<const Vector>& state) {
  if (state.size() != lib.state_dim)
    throw ContractViolation("eval_terms: state dimension does not match library");
  Vector out(lib.size());
  eval_terms_into(lib, state, out);
  return out;
}

/// Root of the mean of squares over all p x n entries.
[[nodiscard]] inline double rms(const SamplePath& path) {
  return std::sqrt(path.values.array().square().mean());
}

/// Pooled RMS over every entry of every path.
[[nodiscard]] inline double rms(const Dataset& data) {
  double ss = 0.0;
  double count = 0.0;
  for (const auto& path : data.paths) {
    ss += path.values.array().square().sum();
    count += static_cast<double>(path.values.size());
  }
  return std::sqrt(ss / count);
}

/// Measurement-noise model: additive Gaussian scaled by the dataset RMS, or
/// multiplicative lognormal.
struct NoiseSpec {
  enum class Kind { additive_gaussian, multiplicative_lognormal };

  Kind kind = Kind::additive_gaussian;
  double level = 0.0;  // additive: sigma as a fraction of RMS; multiplicative: lognormal sigma
  std::uint64_t seed = 0;
};

[[nodiscard]] inline Dataset add_noise(const Dataset& data, const NoiseSpec& spec) {
  if (spec.level < 0.0) throw ContractViolation("add_noise: level must be >= 0");
  if (spec.level == 0.0) return data;
  RandomEngine rng = make_engine(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma =
      spec.kind == NoiseSpec::Kind::additive_gaussian ? spec.level * rms(data) : spec.level;
  std::vector<SamplePath> out;
  out.reserve(data.paths.size());
  for (const auto& path : data.paths) {
    Matrix values = path.values;
    for (Eigen::Index t = 0; t < values.cols(); ++t)
      for (Eigen::Index j = 0; j < values.rows(); ++j) {
        if (spec.kind == NoiseSpec::Kind::additive_gaussian)
          values(j, t) += sigma * gauss(rng);
        else
          values(j, t) *= std::exp(sigma * gauss(rng));
      }
    out.emplace_back(path.times, std::move(values));
  }
  return Dataset(std::move(out));
}

}  // namespace eqdisc
