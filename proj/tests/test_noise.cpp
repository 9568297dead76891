#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "riskest/noise.hpp"

using namespace riskest;

TEST(Noise, SameSeedSameDraw) {
  const auto a = sample_noise(0.1, 50, 1234);
  const auto b = sample_noise(0.1, 50, 1234);
  EXPECT_EQ(a.eps, b.eps);
  EXPECT_EQ(a.seed, 1234u);
}

TEST(Noise, PooledVarianceMatchesSigma) {
  const double sigma = 0.1;
  double sum = 0.0, sq = 0.0;
  long count = 0;
  for (int d = 0; d < 1000; ++d) {
    const auto e = sample_noise(sigma, 1000, derive_seed(7, d)).eps;
    sum += e.sum();
    sq += e.squaredNorm();
    count += e.size();
  }
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  EXPECT_NEAR(var, sigma * sigma, 0.01 * sigma * sigma);
  EXPECT_NEAR(mean, 0.0, 3.0 * sigma / std::sqrt(static_cast<double>(count)));
}

TEST(Noise, DistinctSeedsUncorrelated) {
  const int m = 100000;
  const auto a = sample_noise(1.0, m, derive_seed(3, 0)).eps;
  const auto b = sample_noise(1.0, m, derive_seed(3, 1)).eps;
  const double cov = a.dot(b) / m;
  EXPECT_NEAR(cov, 0.0, 3.0 / std::sqrt(static_cast<double>(m)));
}

TEST(Noise, DerivedSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (int d = 0; d < 10000; ++d) seen.insert(derive_seed(42, d));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Noise, RejectsBadArguments) {
  EXPECT_THROW(sample_noise(0.0, 5, 1), std::invalid_argument);
  EXPECT_THROW(sample_noise(1.0, 0, 1), std::invalid_argument);
}
