#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "eqdisc/priors.hpp"

using namespace eqdisc;

TEST_CASE("spike-and-slab degenerate inclusion probabilities", "[priors]") {
  const auto zeros = sample_spike_slab({0.0, 1.0}, 3, 4, 10, 5);
  for (const auto& m : zeros) CHECK((m.array() == 0.0).all());

  // inclusion 1: every entry is a slab draw; empirical variance near 1.
  const auto dense = sample_spike_slab({1.0, 1.0}, 100, 100, 100, 6);  // 1e6 entries
  double ss = 0.0;
  for (const auto& m : dense) ss += m.array().square().sum();
  const double var = ss / 1e6;
  CHECK(var > 0.98);
  CHECK(var < 1.02);
}

TEST_CASE("spike-and-slab zero fraction converges to 1 - inclusion_prob", "[priors]") {
  const auto draws = sample_spike_slab({0.3, 2.0}, 100, 100, 100, 17);  // 1e6 entries
  double zeros = 0.0;
  for (const auto& m : draws) zeros += static_cast<double>((m.array() == 0.0).count());
  const double fraction = zeros / 1e6;
  CHECK(fraction > 0.695);
  CHECK(fraction < 0.705);
}

TEST_CASE("samplers are seed-reproducible with the requested shape", "[priors]") {
  const auto a = sample_spike_slab({0.4, 1.5}, 2, 6, 5, 99);
  const auto b = sample_spike_slab({0.4, 1.5}, 2, 6, 5, 99);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].rows() == 2);
    REQUIRE(a[i].cols() == 6);
    CHECK((a[i].array() == b[i].array()).all());
  }
  const auto h1 = sample_horseshoe({0.1, 4.0, 2.0}, 3, 4, 5, 31);
  const auto h2 = sample_horseshoe({0.1, 4.0, 2.0}, 3, 4, 5, 31);
  for (std::size_t i = 0; i < h1.size(); ++i) {
    REQUIRE(h1[i].rows() == 3);
    CHECK((h1[i].array() == h2[i].array()).all());
  }
}

TEST_CASE("horseshoe conditional SD is bounded by the slab", "[priors]") {
  // Algebraic identity: (beta*c*tau)^2 / (c^2 + tau^2 beta^2) <= c^2.
  RandomEngine rng = make_engine(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000000; ++i) {
    const double c = 0.1 + 10.0 * unit(rng);
    const double tau = half_cauchy(rng, 0.5);
    const double beta = half_cauchy(rng, 1.0);
    const double slab_sd = beta * c / std::sqrt(c * c + tau * tau * beta * beta);
    CHECK(slab_sd * tau <= c * (1.0 + 1e-12));
  }
}

TEST_CASE("horseshoe global-shrinkage limit sends draws to zero", "[priors]") {
  const auto draws = sample_horseshoe({1e-9, 4.0, 2.0}, 10, 10, 1000, 41);  // 1e5 entries
  std::vector<double> magnitudes;
  magnitudes.reserve(100000);
  for (const auto& m : draws)
    for (Eigen::Index i = 0; i < m.size(); ++i) magnitudes.push_back(std::abs(m(i)));
  std::nth_element(magnitudes.begin(), magnitudes.begin() + 50000, magnitudes.end());
  CHECK(magnitudes[50000] < 1e-6);
}

TEST_CASE("horseshoe deciles match an independent re-implementation", "[priors]") {
  const HorseshoeSpec spec{0.1, 4.0, 2.0};
  const Eigen::Index per_matrix = 4;
  const Eigen::Index matrices = 250000;  // 1e6 entries per sampler
  const auto draws = sample_horseshoe(spec, 2, 2, matrices, 53);
  std::vector<double> ours;
  ours.reserve(static_cast<std::size_t>(matrices * per_matrix));
  for (const auto& m : draws)
    for (Eigen::Index i = 0; i < m.size(); ++i) ours.push_back(std::abs(m(i)));

  // Straight-line oracle: same hierarchy, different primitives (half-Cauchy
  // via |Z1/Z2|, inverse gamma via two independent draws).
  std::mt19937_64 rng(7777);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::gamma_distribution<double> gamma(spec.nu / 2.0, 1.0);
  std::vector<double> theirs;
  theirs.reserve(ours.size());
  for (Eigen::Index i = 0; i < matrices; ++i) {
    const double c2 = (spec.nu * spec.s * spec.s / 2.0) / gamma(rng);
    const double tau = spec.tau0 * std::abs(gauss(rng) / gauss(rng));
    for (Eigen::Index k = 0; k < per_matrix; ++k) {
      const double beta = std::abs(gauss(rng) / gauss(rng));
      const double slab = beta * std::sqrt(c2) / std::sqrt(c2 + tau * tau * beta * beta);
      theirs.push_back(std::abs(slab * tau * gauss(rng)));
    }
  }

  std::sort(ours.begin(), ours.end());
  std::sort(theirs.begin(), theirs.end());
  for (int decile = 1; decile <= 9; ++decile) {
    const auto idx = static_cast<std::size_t>(0.1 * decile * static_cast<double>(ours.size()));
    const double q_ours = ours[idx];
    const double q_theirs = theirs[idx];
    CHECK(std::abs(q_ours - q_theirs) / q_theirs < 0.03);
  }
}

TEST_CASE("entrywise spike-and-slab anchors each entry separately", "[priors]") {
  EntrywiseSpikeSlabSpec spec;
  spec.location = Matrix::Zero(1, 2);
  spec.location(0, 0) = 5.0;
  spec.scale = Matrix::Constant(1, 2, 0.1);
  spec.inclusion = Matrix::Zero(1, 2);
  spec.inclusion(0, 0) = 1.0;  // always on, near 5
  spec.inclusion(0, 1) = 0.0;  // never on
  const auto draws = sample_entrywise_spike_slab(spec, 2000, 61);
  double mean0 = 0.0;
  for (const auto& m : draws) {
    CHECK(m(0, 1) == 0.0);
    mean0 += m(0, 0);
  }
  mean0 /= 2000.0;
  CHECK(mean0 == Catch::Approx(5.0).margin(0.02));

  spec.scale(0, 1) = -1.0;
  CHECK_THROWS_AS(sample_entrywise_spike_slab(spec, 10, 1), ContractViolation);
}

TEST_CASE("prior samplers validate their specs", "[priors]") {
  CHECK_THROWS_AS(sample_spike_slab({-0.1, 1.0}, 2, 2, 1, 0), ContractViolation);
  CHECK_THROWS_AS(sample_spike_slab({0.5, 0.0}, 2, 2, 1, 0), ContractViolation);
  CHECK_THROWS_AS(sample_spike_slab({0.5, 1.0}, 0, 2, 1, 0), ContractViolation);
  CHECK_THROWS_AS(sample_horseshoe({0.0, 4.0, 2.0}, 2, 2, 1, 0), ContractViolation);
}
