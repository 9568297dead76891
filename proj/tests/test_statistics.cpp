#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "riskest/statistics.hpp"

using namespace riskest;

namespace {

// Tiny synthetic study with two rules and hand-set errors.
StudyResult synthetic(const std::vector<double>& ea, const std::vector<double>& eb) {
  StudyResult s;
  s.config.rules = {Rule::DP, Rule::PSURE};
  s.config.grid = AlphaGrid::logarithmic(-2, 2, 1, true);
  for (std::size_t k = 0; k < ea.size(); ++k) {
    StudyRecord r;
    r.draw_index = static_cast<int>(k);
    RuleOutcome a, b;
    a.error_l2 = a.error_l1 = ea[k];
    b.error_l2 = b.error_l1 = eb[k];
    a.alpha = 1.0;
    b.alpha = 10.0;
    r.outcomes = {a, b};
    s.records.push_back(r);
  }
  return s;
}

}  // namespace

TEST(Describe, SingleValue) {
  const auto s = describe({4.0});
  EXPECT_EQ(s.count, 1);
  EXPECT_EQ(s.mean, 4.0);
  EXPECT_EQ(s.median, 4.0);
  EXPECT_EQ(s.std, 0.0);
}

TEST(Describe, MatchesNaiveRecomputation) {
  std::vector<double> v = {3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0};
  const auto s = describe(v);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_DOUBLE_EQ(s.mean, mean);
  EXPECT_NEAR(s.std, std::sqrt(ss / (v.size() - 1)), 1e-14);
  EXPECT_DOUBLE_EQ(s.median, 3.5);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 9.0);
  EXPECT_THROW(describe({}), std::invalid_argument);
}

TEST(WinFraction, IdenticalRulesGiveHalf) {
  const auto s = synthetic({1, 2, 3}, {1, 2, 3});
  EXPECT_DOUBLE_EQ(win_fraction(s, Rule::PSURE, Rule::DP), 0.5);
}

TEST(WinFraction, CountsStrictWins) {
  const auto s = synthetic({1, 2, 3, 4}, {0.5, 3, 2, 4});
  EXPECT_DOUBLE_EQ(win_fraction(s, Rule::PSURE, Rule::DP), (2 + 0.5) / 4);
  EXPECT_DOUBLE_EQ(win_fraction(s, Rule::DP, Rule::PSURE), (1 + 0.5) / 4);
}

TEST(AlphaHistogram, SingleBinAndInfinity) {
  const auto g = AlphaGrid::logarithmic(-2, 2, 1, true);
  const auto h = alpha_histogram({10.0, 10.0, 10.0, std::numeric_limits<double>::infinity()}, g);
  EXPECT_EQ(h.total, 4);
  EXPECT_EQ(h.infinite_count, 1);
  const auto p = h.probabilities();
  EXPECT_EQ(std::count_if(p.begin(), p.end(), [](double x) { return x > 0; }), 1);
  EXPECT_DOUBLE_EQ(*std::max_element(p.begin(), p.end()), 0.75);
  EXPECT_DOUBLE_EQ(h.infinite_probability(), 0.25);
}

TEST(AlphaHistogram, DisplayFloor) {
  const auto g = AlphaGrid::logarithmic(-2, 2, 1, false);
  const auto h = alpha_histogram({1.0, 1.0}, g);
  for (double p : h.display_probabilities()) EXPECT_GE(p, 1.0 / (2 * 2));
}

TEST(LogHistogram, AllInOneBin) {
  const auto h = log_histogram({5.0, 5.0, 5.0}, 10);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0L), 3);
  EXPECT_EQ(*std::max_element(h.counts.begin(), h.counts.end()), 3);
}

TEST(JointHistogram, MarginalsMatchOneDimensional) {
  std::vector<double> xs, ys;
  for (int k = 1; k <= 200; ++k) {
    xs.push_back(std::pow(10.0, std::sin(k) * 2));
    ys.push_back(std::pow(10.0, std::cos(3 * k)));
  }
  const auto j = joint_histogram(xs, ys, 15);
  const auto mx = j.marginal_x(), my = j.marginal_y();
  const auto hx = log_histogram(xs, 15), hy = log_histogram(ys, 15);
  EXPECT_EQ(mx.counts, hx.counts);
  EXPECT_EQ(my.counts, hy.counts);
  EXPECT_EQ(j.total, 200);
}

TEST(Quantile, Linear) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 1.0), 5.0);
}

TEST(FitLogLog, ExactPowerLaw) {
  std::vector<double> xs = {16, 32, 64, 128}, ys;
  for (double x : xs) ys.push_back(3.0 * std::pow(x, -1.5));
  const auto f = fit_loglog(xs, ys);
  EXPECT_NEAR(f.slope, -1.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
}

TEST(RateCheck, SyntheticInverseSquareRootSups) {
  // sup/m = 1/sqrt(m)  =>  (E sup / m)^2 = 1/m, slope -1.
  std::vector<RateSample> samples;
  for (int m : {16, 32, 64, 128, 256, 512}) {
    RateSample s;
    s.m = m;
    s.sups.assign(50, std::sqrt(static_cast<double>(m)));
    samples.push_back(s);
  }
  const auto r = rate_check(samples, RateNormalization::PSURE);
  EXPECT_NEAR(r.fit.slope, -1.0, 1e-2);
  EXPECT_THROW(rate_check({samples[0]}, RateNormalization::PSURE), std::invalid_argument);
}

TEST(RateCheck, CondNormalization) {
  RateSample s;
  s.m = 10;
  s.cond = 3.0;
  s.sups = {90.0};
  EXPECT_NEAR(rate_statistic(s, RateNormalization::GSURECond), 1.0, 1e-15);
  EXPECT_NEAR(rate_statistic(s, RateNormalization::GSUREPlain), 81.0, 1e-12);
  EXPECT_EQ(parse_normalization(normalization_name(RateNormalization::GSURECond)), RateNormalization::GSURECond);
}

TEST(RuleErrors, MetricsAndAlphas) {
  const auto s = synthetic({1, 2}, {3, 4});
  EXPECT_EQ(rule_errors(s, Rule::PSURE), (std::vector<double>{3, 4}));
  EXPECT_EQ(rule_alphas(s, Rule::DP), (std::vector<double>{1, 1}));
  EXPECT_THROW(rule_errors(s, Rule::DP, ErrorMetric::L2Prediction), std::invalid_argument);
  EXPECT_DOUBLE_EQ(error_stats(s, Rule::PSURE).mean, 3.5);
}

TEST(LogHistogram, MaximumAlwaysBinned) {
  // The top edge must equal the maximum exactly, whatever the rounding of lo + (hi - lo).
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> v;
    for (int k = 0; k < 9; ++k) v.push_back(std::pow(10.0, u(gen)));
    const auto h = log_histogram(v, 1 + trial % 37);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0L), 9);
    const auto j = joint_histogram(v, v, 1 + trial % 23);
    EXPECT_EQ(std::accumulate(j.counts.begin(), j.counts.end(), 0L), 9);
  }
}
