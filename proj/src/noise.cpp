#include "riskest/noise.hpp"

#include <random>

#include "riskest/numeric.hpp"

namespace riskest {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

NoiseDraw sample_noise(double sigma, int m, std::uint64_t seed) {
  require(sigma > 0.0 && std::isfinite(sigma), "sample_noise: sigma must be positive and finite");
  require(m >= 1, "sample_noise: m must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  NoiseDraw draw;
  draw.seed = seed;
  draw.eps.resize(m);
  for (int i = 0; i < m; ++i) draw.eps[i] = normal(gen);
  return draw;
}

}  // namespace riskest
