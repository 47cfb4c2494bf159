#pragma once

#include <cstdint>
#include <random>

namespace eqdisc {

/// splitmix64 mixing step.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic per-item seed. Batches seeded this way give identical results
/// no matter how work is split across threads.
[[nodiscard]] constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

using RandomEngine = std::mt19937_64;

[[nodiscard]] inline RandomEngine make_engine(std::uint64_t seed) {
  return RandomEngine(splitmix64(seed));
}

/// Uniform draw in [0, 1) from a hashed counter. Used for the accept/reject
/// stream so the decision for index i never depends on evaluation order.
[[nodiscard]] constexpr double uniform_from_counter(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(sub_seed(seed, index) >> 11) * 0x1.0p-53;
}

/// Half-Cauchy C+(0, scale) via the inverse-CDF tangent transform.
template <class Engine>
[[nodiscard]] double half_cauchy(Engine& rng, double scale) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return scale * std::tan(1.5707963267948966 * unit(rng));
}

}  // namespace eqdisc
