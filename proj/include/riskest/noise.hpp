#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace riskest {

struct NoiseDraw {
  Eigen::VectorXd eps;
  std::uint64_t seed = 0;
};

/// SplitMix64 finalizer; used to derive well-separated per-draw seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of draw `index` under `master_seed`. Draws are independent streams and
/// can be generated in any order or on any worker.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

/// m i.i.d. N(0, sigma^2) values, reproducible from `seed`.
NoiseDraw sample_noise(double sigma, int m, std::uint64_t seed);

}  // namespace riskest
