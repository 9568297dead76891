#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "riskest/l2_rules.hpp"
#include "riskest/noise.hpp"
#include "riskest/numeric.hpp"
#include "riskest/problem.hpp"
#include "riskest/risk_curves.hpp"
#include "test_util.hpp"

using namespace riskest;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact spectral coordinates for a diagonal operator, no rounding in the basis change.
SpectralCoords exact_coords(const SpectralDecomposition& d, const Eigen::VectorXd& x, const Eigen::VectorXd& eps) {
  SpectralCoords c;
  c.x_star = x;
  c.eps = eps;
  c.y = d.gammas.cwiseProduct(x) + eps;
  return c;
}

struct Fixture {
  Eigen::MatrixXd A;
  SpectralDecomposition dec;
  Eigen::VectorXd x;
  Fixture(int m, std::uint64_t seed) {
    A = Eigen::MatrixXd::Identity(m, m) + 0.3 * random_matrix(m, m, seed);
    dec = decompose(A);
    x = random_vector(m, seed + 100);
  }
  SpectralCoords coords(double sigma, std::uint64_t seed) const {
    const Eigen::VectorXd e = sample_noise(sigma, static_cast<int>(A.rows()), seed).eps;
    return to_spectral(dec, A * x + e, x);
  }
};

}  // namespace

TEST(RuleNames, RoundTrip) {
  for (Rule r : {Rule::Oracle, Rule::DP, Rule::PSURE, Rule::SURE, Rule::MSPEOracle, Rule::MSEEOracle})
    EXPECT_EQ(parse_rule(rule_name(r)), r);
  EXPECT_EQ(parse_rule("gsure"), Rule::SURE);
  EXPECT_THROW(parse_rule("bogus"), std::invalid_argument);
  const auto rs = parse_rules("dp,psure,sure");
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[2], Rule::SURE);
  for (ErrorMetric m : {ErrorMetric::L2Estimation, ErrorMetric::L2Prediction, ErrorMetric::L1})
    EXPECT_EQ(parse_metric(metric_name(m)), m);
}

TEST(DiscrepancyValue, Limits) {
  const Fixture f(8, 1);
  const auto c = f.coords(0.2, 5);
  EXPECT_NEAR(dp_value(f.dec, c, 0.0, 0.2), -8 * 0.04, 1e-12);
  EXPECT_NEAR(dp_value(f.dec, c, kInf, 0.2), c.y.squaredNorm() - 8 * 0.04, 1e-12);
}

TEST(DiscrepancySelect, IdentityRootIsOne) {
  const int m = 16;
  const double sigma = 0.1;
  const auto d = decompose(Eigen::MatrixXd::Identity(m, m));
  // ||y||^2 = 4 m sigma^2 puts the root of (alpha/(1+alpha))^2 ||y||^2 = m sigma^2 at alpha = 1.
  Eigen::VectorXd y = random_vector(m, 3);
  y *= std::sqrt(4.0 * m * sigma * sigma) / y.norm();
  const auto c = exact_coords(d, y, Eigen::VectorXd::Zero(m));
  const auto s = dp_select(d, c, AlphaGrid::quadratic_default(), sigma);
  EXPECT_NEAR(s.alpha_hat, 1.0, 2e-6);
  EXPECT_FALSE(s.at_boundary);
  const auto g = AlphaGrid::quadratic_default();
  EXPECT_GE(g[s.index], s.alpha_hat * (1 - 1e-12));
  EXPECT_LT(g[s.index - 1], s.alpha_hat);
}

TEST(DiscrepancySelect, MonotoneInSigma) {
  const Fixture f(12, 2);
  const auto c = f.coords(0.1, 7);
  const auto grid = AlphaGrid::quadratic_default();
  double prev = 0.0;
  for (double s : {0.02, 0.05, 0.1, 0.2}) {
    const double a = dp_select(f.dec, c, grid, s).alpha_hat;
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(DiscrepancySelect, InfinityWhenResidualNeverReachesNoise) {
  const auto d = decompose(Eigen::MatrixXd::Identity(4, 4));
  const auto c = exact_coords(d, Eigen::VectorXd::Constant(4, 1e-3), Eigen::VectorXd::Zero(4));
  const auto grid = AlphaGrid::quadratic_default();
  const auto s = dp_select(d, c, grid, 1.0);
  EXPECT_TRUE(std::isinf(s.alpha_hat));
  EXPECT_TRUE(s.at_boundary);
  EXPECT_EQ(s.index, grid.size() - 1);
}

TEST(DiscrepancySelect, RootBeyondFiniteGrid) {
  const auto d = decompose(Eigen::MatrixXd::Identity(4, 4));
  Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 1.0);
  y *= std::sqrt(4.0 * 4.0) / y.norm();
  const auto c = exact_coords(d, y, Eigen::VectorXd::Zero(4));
  const auto grid = AlphaGrid::logarithmic(-3.0, -1.0, 0.1, true);
  const auto s = dp_select(d, c, grid, 1.0);
  EXPECT_NEAR(s.alpha_hat, 1.0, 2e-6);
  EXPECT_TRUE(s.at_boundary);
}

TEST(PsureValue, Limits) {
  const Fixture f(8, 3);
  const double sigma = 0.3;
  const auto c = f.coords(sigma, 9);
  EXPECT_NEAR(psure_value(f.dec, c, 0.0, sigma), 8 * sigma * sigma, 1e-10);
  EXPECT_NEAR(psure_value(f.dec, c, kInf, sigma), c.y.squaredNorm() - 8 * sigma * sigma, 1e-12);
}

TEST(GsureValue, Limits) {
  const Fixture f(8, 4);
  const double sigma = 0.3;
  const auto c = f.coords(sigma, 10);
  const double inv2 = f.dec.gammas.array().square().inverse().sum();
  EXPECT_NEAR(gsure_value(f.dec, c, 0.0, sigma), sigma * sigma * inv2, 1e-9 * inv2);
  const auto d = decompose(Eigen::MatrixXd::Identity(5, 5));
  const Eigen::VectorXd y = random_vector(5, 11);
  const auto ci = exact_coords(d, y, Eigen::VectorXd::Zero(5));
  EXPECT_NEAR(gsure_value(d, ci, kInf, sigma), y.squaredNorm() - 5 * sigma * sigma, 1e-12);
}

TEST(Unbiasedness, PsureAndGsureMeansMatchTrueRisk) {
  const Fixture f(16, 5);
  const double sigma = 0.5;
  const int N = 4000;
  for (double alpha : {0.05, 0.5}) {
    double sp = 0, sp2 = 0, sg = 0, sg2 = 0;
    for (int k = 0; k < N; ++k) {
      const auto c = f.coords(sigma, derive_seed(99, k));
      const double p = psure_value(f.dec, c, alpha, sigma);
      const double g = gsure_value(f.dec, c, alpha, sigma);
      sp += p;
      sp2 += p * p;
      sg += g;
      sg2 += g * g;
    }
    const auto c0 = f.coords(sigma, 1);
    const double mp = sp / N, mg = sg / N;
    const double sep = std::sqrt((sp2 / N - mp * mp) / N), seg = std::sqrt((sg2 / N - mg * mg) / N);
    EXPECT_NEAR(mp, mspe_true(f.dec, c0, alpha, sigma), 4.0 * sep) << alpha;
    EXPECT_NEAR(mg, msee_true(f.dec, c0, alpha, sigma), 4.0 * seg) << alpha;
  }
}

TEST(TrueRisk, NoiselessMspeIsPredictionError) {
  const Fixture f(10, 6);
  const auto c = to_spectral(f.dec, f.A * f.x, f.x);
  for (double a : {1e-3, 0.1, 2.0})
    EXPECT_NEAR(mspe_true(f.dec, c, a, 0.0), (f.A * (testutil::dense_tikhonov(f.A, f.A * f.x, a) - f.x)).squaredNorm(), 1e-10);
}

TEST(TrueRisk, MseeAtZero) {
  const Fixture f(10, 7);
  const auto c = f.coords(0.2, 3);
  const double inv2 = f.dec.gammas.array().square().inverse().sum();
  EXPECT_NEAR(msee_true(f.dec, c, 0.0, 0.2), 0.04 * inv2, 1e-9 * inv2);
}

TEST(TrueRisk, PsureMinusMspeEqualsDpMinusEdp) {
  const Fixture f(10, 8);
  for (int k = 0; k < 5; ++k) {
    const auto c = f.coords(0.2, 50 + k);
    for (double a : {1e-4, 0.1, 3.0}) {
      const double lhs = psure_value(f.dec, c, a, 0.2) - mspe_true(f.dec, c, a, 0.2);
      const double rhs = dp_value(f.dec, c, a, 0.2) - edp_true(f.dec, c, a, 0.2);
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
  }
}

TEST(Errors, MatchDenseOracle) {
  const Fixture f(9, 9);
  const auto e = sample_noise(0.2, 9, 4).eps;
  const Eigen::VectorXd y = f.A * f.x + e;
  const auto c = to_spectral(f.dec, y, f.x);
  for (double a : {1e-3, 0.4, 5.0}) {
    const Eigen::VectorXd xa = testutil::dense_tikhonov(f.A, y, a);
    EXPECT_NEAR(estimation_error_sq(f.dec, c, a), (xa - f.x).squaredNorm(), 1e-9);
    EXPECT_NEAR(prediction_error_sq(f.dec, c, a), (f.A * (xa - f.x)).squaredNorm(), 1e-9);
    EXPECT_NEAR(projected_error_sq(f.dec, c, a), (xa - f.x).squaredNorm(), 1e-9);  // full rank
    EXPECT_NEAR(l1_error(f.dec, c, a), (xa - f.x).lpNorm<1>(), 1e-9);
    EXPECT_NEAR(loss_l(f.dec, c, a), (f.A * (xa - f.x)).squaredNorm() / 9.0, 1e-10);
    EXPECT_NEAR(loss_tilde(f.dec, c, a), loss_scaling(f.dec).c_m * (xa - f.x).squaredNorm(), 1e-10);
  }
}

TEST(Errors, ProjectedErrorDropsNullSpace) {
  // 3x5 operator: the projector onto the row space is A^+ A.
  const Eigen::MatrixXd A = random_matrix(3, 5, 21);
  const auto d = decompose(A);
  const Eigen::VectorXd x = random_vector(5, 22), y = random_vector(3, 23);
  const auto c = to_spectral(d, y, x);
  const Eigen::MatrixXd P = A.completeOrthogonalDecomposition().pseudoInverse() * A;
  for (double a : {0.01, 1.0}) {
    const Eigen::VectorXd xa = testutil::dense_tikhonov(A, y, a);
    EXPECT_NEAR(projected_error_sq(d, c, a), (P * (xa - x)).squaredNorm(), 1e-9);
    EXPECT_NEAR(estimation_error_sq(d, c, a), (xa - x).squaredNorm(), 1e-9);
  }
}

TEST(LossScaling, Identity) {
  const auto s = loss_scaling(decompose(Eigen::MatrixXd::Identity(16, 16)));
  EXPECT_NEAR(s.c_m, 1.0 / 16, 1e-15);
  EXPECT_NEAR(s.d_m, 1.0 / 4, 1e-15);
}

TEST(SelectByMinimization, ConstantPicksLargestAlpha) {
  const auto g = AlphaGrid::logarithmic(-2, 2, 0.5, false);
  const auto s = select_by_minimization(std::vector<double>(g.size(), 3.0), g, Rule::PSURE);
  EXPECT_EQ(s.index, g.size() - 1);
  EXPECT_TRUE(s.at_boundary);
}

TEST(SelectByMinimization, InteriorConvexAndShiftInvariant) {
  const auto g = AlphaGrid::logarithmic(-5, 5, 0.1, false);
  std::vector<double> v(g.size()), w(g.size());
  for (int k = 0; k < g.size(); ++k) {
    v[k] = (k - 37.0) * (k - 37.0);
    w[k] = v[k] + 1e3;
  }
  const auto s = select_by_minimization(v, g, Rule::SURE);
  EXPECT_EQ(s.index, 37);
  EXPECT_FALSE(s.at_boundary);
  EXPECT_DOUBLE_EQ(s.alpha_hat, g[37]);
  EXPECT_EQ(select_by_minimization(w, g, Rule::SURE).index, 37);
}

TEST(SelectByMinimization, MinimumAtInfinity) {
  const auto g = AlphaGrid::logarithmic(-2, 2, 1, true);
  std::vector<double> v(g.size());
  for (int k = 0; k < g.size(); ++k) v[k] = -k;
  const auto s = select_by_minimization(v, g, Rule::PSURE);
  EXPECT_TRUE(std::isinf(s.alpha_hat));
  EXPECT_TRUE(s.at_boundary);
}

TEST(SelectByMinimization, NonFiniteThrows) {
  const auto g = AlphaGrid::logarithmic(-2, 2, 1, false);
  std::vector<double> v(g.size(), 1.0);
  v[2] = std::nan("");
  EXPECT_THROW(select_by_minimization(v, g, Rule::PSURE), NumericError);
}

TEST(OracleSelect, NoiselessPicksGridMinimum) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A.diagonal() << 1.0, 0.5, 0.2;
  const auto d = decompose(A);
  const auto c = exact_coords(d, Eigen::Vector3d(1.0, -2.0, 0.5), Eigen::VectorXd::Zero(3));
  const auto g = AlphaGrid::logarithmic(-10, 2, 0.1, false);
  EXPECT_EQ(oracle_select(d, c, g, ErrorMetric::L2Estimation).index, 0);
}

TEST(OracleSelect, MatchesBruteForceScan) {
  const Fixture f(12, 10);
  const auto c = f.coords(0.3, 12);
  const auto g = AlphaGrid::logarithmic(-6, 3, 0.05, true);
  const auto s = oracle_select(f.dec, c, g, ErrorMetric::L2Estimation);
  int best = 0;
  for (int k = 0; k < g.size(); ++k)
    if (estimation_error_sq(f.dec, c, g[k]) <= estimation_error_sq(f.dec, c, g[best])) best = k;
  EXPECT_EQ(s.index, best);
  const auto s1 = oracle_select(f.dec, c, g, ErrorMetric::L1);
  for (int k = 0; k < g.size(); ++k) EXPECT_LE(l1_error(f.dec, c, s1.alpha_hat), l1_error(f.dec, c, g[k]) + 1e-15);
}

TEST(PsureBounds, IdentityClosedForm) {
  const auto d = decompose(Eigen::MatrixXd::Identity(4, 4));
  const auto [lo, hi] = psure_alpha_bounds(d, Eigen::VectorXd::Constant(4, 2.0), 0.5);
  EXPECT_NEAR(lo, 0.25 / 4.0, 1e-15);
  EXPECT_NEAR(hi, 1.0, 1e-15);
  const auto [lo2, hi2] = psure_alpha_bounds(d, Eigen::VectorXd::Constant(4, 0.5), 0.5);
  EXPECT_NEAR(lo2, 1.0, 1e-15);
  EXPECT_NEAR(hi2, 8.0, 1e-14);
  EXPECT_NEAR(psure_alpha_bounds(d, Eigen::VectorXd::Constant(4, 2.0), 1.0).first, 4.0 * lo, 1e-15);
  EXPECT_THROW(psure_alpha_bounds(d, Eigen::VectorXd::Zero(4), 1.0), std::invalid_argument);
}

TEST(PsureBounds, ContainMspeMinimizerOnReferenceProblem) {
  const auto p = ProblemInstance::build(64, 64, 0.06, 0.1);
  const auto d = decompose(p.A);
  const auto c = to_spectral(d, p.clean_data(), p.x_star);
  const auto g = AlphaGrid::quadratic_default();
  const RiskCurves rc(d, g, 0.1);
  const auto s = select_by_minimization(rc.mspe(c), g, Rule::MSPEOracle);
  const auto [lo, hi] = psure_alpha_bounds(d, c.x_star, 0.1);
  EXPECT_GE(s.alpha_hat, lo * 0.98);
  EXPECT_LE(s.alpha_hat, hi * 1.02);
}
