#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "eqdisc/bootstrap.hpp"
#include "eqdisc/core.hpp"
#include "eqdisc/detail/stats.hpp"
#include "eqdisc/simulate.hpp"

using namespace eqdisc;

namespace {

SamplePath synthetic_path(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  RandomEngine rng = make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector t(n);
  Matrix v(p, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i);
    for (Eigen::Index j = 0; j < p; ++j)
      v(j, i) = std::sin(0.07 * static_cast<double>(i) + static_cast<double>(j)) + 0.2 * gauss(rng);
  }
  return {t, v};
}

SamplePath noisy_lv_path(std::uint64_t seed) {
  const TermLibrary lib = build_library(2, 2, false);
  CoefficientMatrix coeffs = CoefficientMatrix::Zero(2, 6);
  coeffs(0, 1) = 1.0;
  coeffs(0, 4) = -0.1;
  coeffs(1, 2) = -1.5;
  coeffs(1, 4) = 0.075;
  Vector x0(2);
  x0 << 10.0, 5.0;
  Vector t(300);
  for (Eigen::Index i = 0; i < 300; ++i) t[i] = 21.9 * static_cast<double>(i) / 299.0;
  const SimOutcome out = integrate(lib, coeffs, x0, t, {10, 1e6});
  const Dataset noisy =
      add_noise(Dataset({*out.path}), {NoiseSpec::Kind::additive_gaussian, 0.05, seed});
  return noisy.paths[0];
}

std::vector<double> pooled_values(const Dataset& data) {
  std::vector<double> out;
  for (const auto& path : data.paths)
    for (Eigen::Index i = 0; i < path.values.size(); ++i) out.push_back(path.values(i));
  return out;
}

std::vector<double> pooled_values(const SamplePath& path) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < path.values.size(); ++i) out.push_back(path.values(i));
  return out;
}

}  // namespace

TEST_CASE("partition_blocks drops the trailing remainder", "[bootstrap]") {
  const SamplePath path = synthetic_path(10, 1, 1);
  const BlockPartition two = partition_blocks(path, 5);
  CHECK(two.block_count == 2);
  CHECK(two.start(0) == 0);
  CHECK(two.last(0) == 4);
  CHECK(two.start(1) == 5);
  CHECK(two.last(1) == 9);

  const BlockPartition three = partition_blocks(path, 3);
  CHECK(three.block_count == 3);
  CHECK(three.last(2) == 8);  // index 9 dropped

  CHECK(partition_blocks(path, 10).block_count == 1);
  CHECK_THROWS_AS(partition_blocks(path, 0), ContractViolation);
  CHECK_THROWS_AS(partition_blocks(path, 11), ContractViolation);
}

TEST_CASE("transition probabilities form a valid distribution", "[bootstrap]") {
  const SamplePath path = synthetic_path(64, 2, 3);
  const BlockPartition part = partition_blocks(path, 4);
  for (Eigen::Index b = 0; b < part.block_count; ++b) {
    const Vector probs = transition_probs(part, path, b, 0.5);
    REQUIRE(probs.size() == part.block_count);
    CHECK((probs.array() >= 0.0).all());
    CHECK(probs.sum() == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK_THROWS_AS(transition_probs(part, path, -1, 0.5), ContractViolation);
  CHECK_THROWS_AS(transition_probs(part, path, 0, 0.0), ContractViolation);
}

TEST_CASE("identical endpoints give the uniform distribution", "[bootstrap]") {
  Vector t(12);
  for (Eigen::Index i = 0; i < 12; ++i) t[i] = static_cast<double>(i);
  const SamplePath path(t, Matrix::Constant(2, 12, 3.0));
  const BlockPartition part = partition_blocks(path, 3);
  const Vector probs = transition_probs(part, path, 1, 0.7);
  for (Eigen::Index j = 0; j < probs.size(); ++j)
    CHECK(probs[j] == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("two-block probabilities follow the kernel ratio", "[bootstrap]") {
  // Hand evaluation from the second block. The first-block candidate is
  // matched through its start value against the series continuation, which
  // here equals that start value, so its weight is kappa(0); the second-block
  // candidate is matched through the first block's endpoint, giving
  // kappa(g/h) with g the gap between the two block-endpoint values.
  Vector t(4);
  t << 0.0, 1.0, 2.0, 3.0;
  Matrix v(1, 4);
  v << 0.5, 1.0, 2.0, 0.5;
  const SamplePath path(t, v);
  const BlockPartition part = partition_blocks(path, 2);
  const double h = 0.8;
  const double g = v(0, 3) - v(0, 1);
  const Vector probs = transition_probs(part, path, 1, h);
  const double kappa0 = 1.0;
  const double kappag = std::exp(-0.5 * (g / h) * (g / h));
  CHECK(probs[0] / probs[1] == Catch::Approx(kappa0 / kappag).epsilon(1e-10));
}

TEST_CASE("block length n reproduces the original path in every replicate", "[bootstrap]") {
  const SamplePath path = synthetic_path(20, 2, 5);
  const Dataset reps = mbb_resample(path, {20, 1.0, 7, 99});
  REQUIRE(reps.path_count() == 7);
  for (const auto& rep : reps.paths) CHECK((rep.values.array() == path.values.array()).all());
}

TEST_CASE("replicates are stitched from verbatim source segments", "[bootstrap]") {
  const SamplePath path = synthetic_path(50, 1, 7);
  const Dataset reps = mbb_resample(path, {5, 0.5, 20, 3});
  std::set<double> source;
  for (Eigen::Index i = 0; i < path.values.size(); ++i) source.insert(path.values(0, i));
  for (const auto& rep : reps.paths)
    for (Eigen::Index i = 0; i < rep.values.size(); ++i)
      CHECK(source.count(rep.values(0, i)) == 1);
}

TEST_CASE("mbb_resample is seed-reproducible", "[bootstrap]") {
  const SamplePath path = synthetic_path(64, 2, 9);
  const MbbConfig cfg{4, 0.6, 10, 42};
  const Dataset a = mbb_resample(path, cfg);
  const Dataset b = mbb_resample(path, cfg);
  for (Eigen::Index i = 0; i < a.path_count(); ++i)
    CHECK((a.paths[static_cast<std::size_t>(i)].values.array() ==
           b.paths[static_cast<std::size_t>(i)].values.array())
              .all());
}

TEST_CASE("replicate marginals approach the source distribution", "[bootstrap]") {
  const SamplePath path = noisy_lv_path(13);
  const BlockPartition part = partition_blocks(path, default_block_length(path.length()));
  const double h = default_mbb_bandwidth(path, part);
  const std::vector<double> source = pooled_values(path);

  const auto ks_at = [&](Eigen::Index r) {
    const Dataset reps =
        mbb_resample(path, {default_block_length(path.length()), h, r, 1234});
    return detail::ks_distance(pooled_values(reps), source);
  };
  const double ks20 = ks_at(20);
  const double ks200 = ks_at(200);
  CHECK(ks200 < 0.05);
  CHECK(ks200 <= ks20 + 0.01);  // decreasing within noise
}

TEST_CASE("replicates preserve lag-1 autocorrelation", "[bootstrap]") {
  const SamplePath path = noisy_lv_path(29);
  const Dataset reps = mbb_resample(
      path, {default_block_length(path.length()),
             default_mbb_bandwidth(path, partition_blocks(path, default_block_length(path.length()))),
             50, 7});
  for (Eigen::Index j = 0; j < path.state_dim(); ++j) {
    const double source_ac = detail::lag1_autocorrelation(path.values.row(j).transpose());
    double mean_ac = 0.0;
    for (const auto& rep : reps.paths)
      mean_ac += detail::lag1_autocorrelation(rep.values.row(j).transpose());
    mean_ac /= static_cast<double>(reps.path_count());
    CHECK(std::abs(mean_ac - source_ac) < 0.15);
  }
}
