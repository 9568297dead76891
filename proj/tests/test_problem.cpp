#include <cmath>

#include <gtest/gtest.h>

#include "riskest/problem.hpp"
#include "riskest/spectral.hpp"

using namespace riskest;

namespace {

// Independent oracle for one matrix entry: direct 2-D trapezoid with explicit
// cell coordinates on [-1/2, 1/2] and explicit periodic wrapping.
double oracle_entry(int i, int j, int m, int n, double l, int nodes, double norm) {
  auto k = [&](double t) {
    t = t - std::floor(t + 0.5);
    if (std::abs(t) >= l) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t / (l * l))) / norm;
  };
  const double s0 = -0.5 + static_cast<double>(i) / m, t0 = -0.5 + static_cast<double>(j) / n;
  const double hs = 1.0 / m / (nodes - 1), ht = 1.0 / n / (nodes - 1);
  double sum = 0.0;
  for (int p = 0; p < nodes; ++p) {
    const double wp = (p == 0 || p == nodes - 1) ? 0.5 : 1.0;
    for (int q = 0; q < nodes; ++q) {
      const double wq = (q == 0 || q == nodes - 1) ? 0.5 : 1.0;
      sum += wp * wq * k((s0 + p * hs) - (t0 + q * ht));
    }
  }
  return std::sqrt(static_cast<double>(m) * n) * sum * hs * ht;
}

double cond_of(int m, double l, int cell_nodes = 100) {
  const Eigen::VectorXd g = singular_values(build_forward_matrix(m, m, l, {cell_nodes, 100000}));
  return g[0] / g[g.size() - 1];
}

}  // namespace

TEST(Kernel, PeakValue) {
  const auto k = KernelSpec::make(0.06);
  EXPECT_DOUBLE_EQ(kernel_eval(0.0, k), std::exp(-1.0) / k.norm_const);
}

TEST(Kernel, VanishesAtSupportBoundary) {
  const auto k = KernelSpec::make(0.06);
  EXPECT_EQ(kernel_eval(0.06, k), 0.0);
  EXPECT_EQ(kernel_eval(-0.06, k), 0.0);
  EXPECT_EQ(kernel_eval(0.3, k), 0.0);
}

TEST(Kernel, Periodic) {
  const auto k = KernelSpec::make(0.1);
  for (double t : {-0.37, -0.05, 0.0, 0.013, 0.07, 0.49}) {
    EXPECT_NEAR(kernel_eval(t + 1.0, k), kernel_eval(t, k), 1e-12);
    EXPECT_NEAR(kernel_eval(t - 3.0, k), kernel_eval(t, k), 1e-12);
  }
}

TEST(Kernel, IntegratesToOne) {
  const auto k = KernelSpec::make(0.04);
  const int nodes = 200001;
  const double h = 1.0 / (nodes - 1);
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) s += (i == 0 || i == nodes - 1 ? 0.5 : 1.0) * kernel_eval(-0.5 + i * h, k);
  EXPECT_NEAR(s * h, 1.0, 1e-6);
}

TEST(KernelNorm, ScalesLinearlyInWidth) {
  EXPECT_NEAR(kernel_norm(0.1, 200000) / kernel_norm(0.05, 200000), 2.0, 1e-8);
}

TEST(KernelNorm, NodeCountSelfConsistent) {
  EXPECT_NEAR(kernel_norm(0.06, 10000) / kernel_norm(0.06, 100000), 1.0, 1e-8);
}

TEST(KernelNorm, Positive) {
  for (double l : {0.01, 0.02, 0.06, 0.25, 0.5}) EXPECT_GT(kernel_norm(l, 1000), 0.0);
}

TEST(KernelNorm, RejectsBadWidth) {
  EXPECT_THROW(kernel_norm(0.0, 100), std::invalid_argument);
  EXPECT_THROW(kernel_norm(0.6, 100), std::invalid_argument);
  EXPECT_THROW(kernel_norm(0.1, 1), std::invalid_argument);
}

TEST(ForwardMatrix, MatchesDirectQuadratureSquare) {
  const int m = 12, nodes = 9;
  const double l = 0.1;
  const auto A = build_forward_matrix(m, m, l, {nodes, 100000});
  const double norm = kernel_norm(l, 100000);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) EXPECT_NEAR(A(i, j), oracle_entry(i, j, m, m, l, nodes, norm), 1e-12) << i << "," << j;
}

TEST(ForwardMatrix, MatchesDirectQuadratureRectangular) {
  const int m = 10, n = 14, nodes = 7;
  const double l = 0.08;
  const auto A = build_forward_matrix(m, n, l, {nodes, 100000});
  const double norm = kernel_norm(l, 100000);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) EXPECT_NEAR(A(i, j), oracle_entry(i, j, m, n, l, nodes, norm), 1e-12) << i << "," << j;
}

TEST(ForwardMatrix, NonnegativeEntries) {
  const auto A = build_forward_matrix(32, 32, 0.04);
  EXPECT_GE(A.minCoeff(), 0.0);
}

TEST(ForwardMatrix, SpectralRadiusIsOne) {
  EXPECT_NEAR(singular_values(build_forward_matrix(64, 64, 0.06))[0], 1.0, 1e-3);
}

TEST(ForwardMatrix, SpectralRadiusStableAcrossM) {
  for (int m : {16, 32, 64, 128}) EXPECT_NEAR(singular_values(build_forward_matrix(m, m, 0.06))[0], 1.0, 1e-3) << m;
}

// Table 1 of the reference study.
TEST(ForwardMatrix, ConditionNumbersMatchPublishedTable) {
  EXPECT_NEAR(cond_of(16, 0.02), 1.27, 0.05 * 1.27);
  EXPECT_NEAR(cond_of(64, 0.06), 6.42e2, 0.05 * 6.42e2);
}

TEST(ForwardMatrix, QuadratureRefinementBarelyMovesCondition) {
  const double c100 = cond_of(32, 0.04, 100);
  const double c101 = cond_of(32, 0.04, 101);
  EXPECT_LT(std::abs(c100 - c101) / c100, 1e-3);
}

TEST(ForwardMatrix, RejectsBadArguments) {
  EXPECT_THROW(build_forward_matrix(0, 4, 0.1), std::invalid_argument);
  EXPECT_THROW(build_forward_matrix(4, 4, 0.0), std::invalid_argument);
  EXPECT_THROW(build_forward_matrix(4, 4, 0.1, {1, 1000}), std::invalid_argument);
}

TEST(TrueSolution, FourSpikes) {
  const auto x = build_true_solution(64);
  EXPECT_EQ((x.array() != 0.0).count(), 4);
}

TEST(TrueSolution, TotalMass) {
  for (int n : {8, 16, 64, 100, 512}) {
    const auto x = build_true_solution(n);
    EXPECT_NEAR(x.sum() / std::sqrt(static_cast<double>(n)), 2.8, 1e-12) << n;
  }
}

TEST(TrueSolution, SpikeCellMatchesCeilingOracle) {
  const int n = 64;
  const double b2 = 1.0 / std::sqrt(11.0);
  const int one_based = static_cast<int>(std::ceil(n * b2));
  EXPECT_EQ(spike_cell(n, b2) + 1, one_based);
  const auto x = build_true_solution(n);
  EXPECT_DOUBLE_EQ(x[one_based - 1], std::sqrt(64.0) * 1.0);
}

TEST(TrueSolution, RequiresEightCells) { EXPECT_THROW(build_true_solution(7), std::invalid_argument); }

TEST(ProblemInstance, BuildsConsistentInstance) {
  const auto p = ProblemInstance::build(32, 32, 0.04, 0.1);
  EXPECT_EQ(p.A.rows(), 32);
  EXPECT_EQ(p.x_star.size(), 32);
  EXPECT_EQ(p.clean_data().size(), 32);
  EXPECT_THROW(ProblemInstance::build(32, 32, 0.04, -1.0), std::invalid_argument);
}
