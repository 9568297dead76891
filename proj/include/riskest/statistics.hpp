#pragma once

#include <string_view>
#include <vector>

#include "riskest/study.hpp"

namespace riskest {

struct ErrorStats {
  int count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation (N - 1); 0 for a single value
};

ErrorStats describe(std::vector<double> values);

/// Per-draw errors of one rule: ||x* - x_alpha||_2 for L2Estimation, ||.||_1 for L1.
std::vector<double> rule_errors(const StudyResult& study, Rule rule,
                                ErrorMetric metric = ErrorMetric::L2Estimation);
std::vector<double> rule_alphas(const StudyResult& study, Rule rule);

ErrorStats error_stats(const StudyResult& study, Rule rule,
                       ErrorMetric metric = ErrorMetric::L2Estimation);

/// Fraction of draws where rule_a has the smaller error; ties count 1/2.
double win_fraction(const StudyResult& study, Rule rule_a, Rule rule_b,
                    ErrorMetric metric = ErrorMetric::L2Estimation);

struct Histogram {
  std::vector<double> edges;  // bins.size() + 1 increasing edges (log10 scale)
  std::vector<long> counts;
  long infinite_count = 0;    // alpha axis: draws with alpha = inf
  long total = 0;

  /// counts / total (the infinity bin is included in total, reported separately).
  std::vector<double> probabilities() const;
  double infinite_probability() const;
  /// Probabilities with empty bins raised to 1/(2 total), for log-scale display.
  std::vector<double> display_probabilities() const;
};

/// log10(alpha) histogram on bins centred at the grid points; alpha = inf goes to
/// its own bin.
Histogram alpha_histogram(const std::vector<double>& alphas, const AlphaGrid& grid);

/// Uniform bins in log10(value) spanning the observed range.
Histogram log_histogram(const std::vector<double>& values, int bins = 200);

struct JointHistogram {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<long> counts;  // row-major: counts[ix * ny + iy]
  long total = 0;

  int nx() const { return static_cast<int>(x_edges.size()) - 1; }
  int ny() const { return static_cast<int>(y_edges.size()) - 1; }
  long at(int ix, int iy) const { return counts[static_cast<std::size_t>(ix * ny() + iy)]; }
  /// log10 probabilities, empty bins floored at 1/(2 total).
  std::vector<double> display_log10_probabilities() const;
  Histogram marginal_x() const;
  Histogram marginal_y() const;
};

/// Joint histogram of log10 errors of two rules (x: rule_a, y: rule_b).
JointHistogram joint_histogram(const StudyResult& study, Rule rule_a, Rule rule_b, int bins = 200,
                               ErrorMetric metric = ErrorMetric::L2Estimation);
JointHistogram joint_histogram(const std::vector<double>& xs, const std::vector<double>& ys, int bins);

// ---- rate checks ----

enum class RateNormalization { PSURE, GSURECond, GSUREPlain };

std::string_view normalization_name(RateNormalization n);
RateNormalization parse_normalization(std::string_view name);

/// Per-m input: sup deviations of one study.
struct RateSample {
  int m = 0;
  double cond = 1.0;
  std::vector<double> sups;
};

RateSample rate_sample(const StudyResult& study, RateNormalization norm);

/// (mean(sup) / s)^2 with s = m (psure, gsure_plain) or m cond^2 (gsure_cond).
double rate_statistic(const RateSample& sample, RateNormalization norm);
/// mean((sup / s)^2), the second-moment variant.
double rate_statistic_second_moment(const RateSample& sample, RateNormalization norm);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;  // natural-log intercept
};

/// Least-squares fit of log(y) = intercept + slope * log(x).
LineFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);

struct RateFit {
  RateNormalization normalization = RateNormalization::PSURE;
  std::vector<int> ms;
  std::vector<double> statistics;
  std::vector<double> second_moments;
  LineFit fit;
};

RateFit rate_check(const std::vector<RateSample>& samples, RateNormalization norm);

// ---- closeness of the risk estimators to the losses ----

struct LossClosenessRow {
  int m = 0;
  double psure_q10 = 0.0, psure_median = 0.0, psure_q90 = 0.0;
  double gsure_q10 = 0.0, gsure_median = 0.0, gsure_q90 = 0.0;
  double rate_psure = 0.0;  // 1/sqrt(m)
  double rate_gsure = 0.0;  // d_m
};

struct LossCloseness {
  std::vector<LossClosenessRow> rows;
  LineFit psure_median_fit;
  LineFit gsure_median_fit;
};

LossCloseness loss_closeness_stats(const std::vector<const StudyResult*>& studies);

/// Linear-interpolated quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace riskest
