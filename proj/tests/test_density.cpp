#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "eqdisc/density.hpp"
#include "eqdisc/detail/stats.hpp"

using namespace eqdisc;

namespace {

Dataset random_dataset(Eigen::Index r, Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  RandomEngine rng = make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) t[i] = static_cast<double>(i);
  std::vector<SamplePath> paths;
  for (Eigen::Index k = 0; k < r; ++k) {
    Matrix v(p, n);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    paths.emplace_back(t, std::move(v));
  }
  return Dataset(std::move(paths));
}

// Independent double-loop evaluation of the trajectory KDE.
double brute_force_log_likelihood(const Dataset& refs, const Vector& bandwidths,
                                  const SamplePath& query) {
  const auto r = static_cast<double>(refs.path_count());
  const auto n = static_cast<double>(refs.length());
  double total = 0.0;
  for (Eigen::Index j = 0; j < refs.state_dim(); ++j) {
    const double h = bandwidths[j];
    double sum = 0.0;
    for (const auto& ref : refs.paths) {
      double d2 = 0.0;
      for (Eigen::Index i = 0; i < ref.length(); ++i) {
        const double d = ref.values(j, i) - query.values(j, i);
        d2 += d * d;
      }
      sum += std::exp(-d2 / (2.0 * h * h));
    }
    total += std::log(sum / r) - 0.5 * n * std::log(2.0 * M_PI) - n * std::log(h);
  }
  return total;
}

double log_normalizer(double n, double h, double r) {
  return -std::log(r) - 0.5 * n * std::log(2.0 * M_PI) - n * std::log(h);
}

std::vector<Vector> gaussian_samples(std::size_t count, double mean, double sd,
                                     std::uint64_t seed) {
  RandomEngine rng = make_engine(seed);
  std::normal_distribution<double> gauss(mean, sd);
  std::vector<Vector> out(count);
  for (auto& v : out) {
    v = Vector(1);
    v[0] = gauss(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("single-reference model peaks at its own path", "[density]") {
  const Dataset data = random_dataset(1, 8, 2, 3);
  const KdeModel model = fit_kde(data, 0.5);
  const double at_ref = kde_log_likelihood(model, data.paths[0]).value;
  // Kernel sum is exactly 1 there, so only the normalizer remains.
  const double expected = 2.0 * log_normalizer(8.0, 0.5, 1.0);
  CHECK(at_ref == Catch::Approx(expected).epsilon(1e-12));

  // Any distinct query scores lower.
  SamplePath other = data.paths[0];
  other.values.array() += 0.3;
  CHECK(kde_log_likelihood(model, other).value < at_ref);
}

TEST_CASE("bandwidth override applies to every variable", "[density]") {
  const KdeModel model = fit_kde(random_dataset(4, 6, 3, 5), 0.5);
  CHECK((model.bandwidths.array() == 0.5).all());
  CHECK_THROWS_AS(fit_kde(random_dataset(2, 4, 1, 5), 0.0), ContractViolation);
}

TEST_CASE("Scott's rule uses the trajectory length as dimension", "[density]") {
  const Dataset data = random_dataset(100, 50, 1, 7);
  const KdeModel model = fit_kde(data);
  Matrix pooled(100, 50);
  for (Eigen::Index i = 0; i < 100; ++i) pooled.row(i) = data.paths[static_cast<std::size_t>(i)].values.row(0);
  const double sd = eqdisc::detail::sample_sd(pooled);
  CHECK(model.bandwidths[0] / sd == Catch::Approx(std::pow(100.0, -1.0 / 54.0)).epsilon(1e-12));
  CHECK(std::pow(100.0, -1.0 / 54.0) == Catch::Approx(0.9182).margin(1e-4));
}

TEST_CASE("zero pooled variance demands a manual bandwidth", "[density]") {
  Vector t(3);
  t << 0.0, 1.0, 2.0;
  const Dataset flat({SamplePath(t, Matrix::Constant(1, 3, 2.0))});
  CHECK_THROWS_AS(fit_kde(flat), InferenceError);
  CHECK_NOTHROW(fit_kde(flat, 0.25));
}

TEST_CASE("two-reference model matches the closed form", "[density]") {
  Vector t(4);
  t << 0.0, 1.0, 2.0, 3.0;
  const Matrix base = Matrix::Zero(1, 4);
  Matrix shifted = base;
  shifted.array() += 0.7;  // distance^2 = 4 * 0.49
  const Dataset data({SamplePath(t, base), SamplePath(t, shifted)});
  const double h = 0.9;
  const KdeModel model = fit_kde(data, h);
  const double d2 = 4.0 * 0.49;
  const double expected = std::log((1.0 + std::exp(-d2 / (2.0 * h * h))) / 2.0) +
                          log_normalizer(4.0, h, 1.0);
  CHECK(kde_log_likelihood(model, data.paths[0]).value == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("KDE log-likelihood matches the brute-force oracle", "[density]") {
  RandomEngine rng = make_engine(11);
  std::uniform_int_distribution<int> rs(1, 5), ns(2, 6), ps(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index r = rs(rng), n = ns(rng), p = ps(rng);
    const Dataset data = random_dataset(r, n, p, 1000 + static_cast<std::uint64_t>(trial));
    const KdeModel model = fit_kde(data, 0.8);
    const SamplePath query =
        random_dataset(1, n, p, 2000 + static_cast<std::uint64_t>(trial)).paths[0];
    const double expected = brute_force_log_likelihood(data, model.bandwidths, query);
    const double got = kde_log_likelihood(model, query).value;
    CHECK(got == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("KDE log-likelihood is exchangeable and permutation-invariant", "[density]") {
  const Dataset data = random_dataset(5, 6, 2, 13);
  const SamplePath query = random_dataset(1, 6, 2, 14).paths[0];
  const KdeModel model = fit_kde(data, 0.6);
  const double reference = kde_log_likelihood(model, query).value;

  // Reference order shuffled.
  Dataset shuffled = data;
  std::reverse(shuffled.paths.begin(), shuffled.paths.end());
  CHECK(kde_log_likelihood(fit_kde(shuffled, 0.6), query).value ==
        Catch::Approx(reference).epsilon(1e-12));

  // State variables permuted in both model and query.
  std::vector<SamplePath> swapped_paths;
  for (const auto& path : data.paths) {
    Matrix v(2, 6);
    v.row(0) = path.values.row(1);
    v.row(1) = path.values.row(0);
    swapped_paths.emplace_back(path.times, std::move(v));
  }
  Matrix qswap(2, 6);
  qswap.row(0) = query.values.row(1);
  qswap.row(1) = query.values.row(0);
  const SamplePath query_swapped(query.times, qswap);
  CHECK(kde_log_likelihood(fit_kde(Dataset(std::move(swapped_paths)), 0.6), query_swapped).value ==
        Catch::Approx(reference).epsilon(1e-12));
}

TEST_CASE("extreme distances stay finite-or-minus-infinity, never NaN", "[density]") {
  Vector t(3);
  t << 0.0, 1.0, 2.0;
  Matrix far = Matrix::Constant(1, 3, 1e5);
  const Dataset data({SamplePath(t, Matrix::Zero(1, 3))});
  const KdeModel model = fit_kde(data, 1e-3);
  const double v = kde_log_likelihood(model, SamplePath(t, far)).value;
  CHECK_FALSE(std::isnan(v));
  CHECK(v < -1e6);
  CHECK_THROWS_AS(kde_log_likelihood(model, random_dataset(1, 5, 1, 3).paths[0]),
                  ContractViolation);
}

TEST_CASE("KL estimate: identical sets, matched Gaussians, shifted Gaussians", "[density]") {
  const auto p = gaussian_samples(10000, 0.0, 1.0, 100);
  CHECK(estimate_kl(p, p) <= 0.01);

  const auto q_same = gaussian_samples(10000, 0.0, 1.0, 200);
  CHECK(estimate_kl(p, q_same) < 0.05);

  const auto q_shift = gaussian_samples(10000, 1.0, 1.0, 300);
  const double kl = estimate_kl(p, q_shift);  // closed form: 0.5
  CHECK(kl > 0.375);
  CHECK(kl < 0.625);

  std::vector<Vector> ragged = p;
  ragged[0] = Vector(2);
  CHECK_THROWS_AS(estimate_kl(ragged, q_same), ContractViolation);
}
