#include "riskest/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "riskest/numeric.hpp"

namespace riskest {

namespace {

std::vector<double> uniform_edges(double lo, double hi, int bins) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) e[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  e.back() = hi;  // lo + (hi - lo) can round below hi, dropping the maximum
  return e;
}

// Bin of v for increasing edges; the last bin is closed on the right.
int bin_of(const std::vector<double>& edges, double v) {
  if (v < edges.front() || v > edges.back()) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  int k = static_cast<int>(it - edges.begin()) - 1;
  return std::min(k, static_cast<int>(edges.size()) - 2);
}

std::vector<double> log10_all(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    require(x > 0.0 && std::isfinite(x), "histogram: values must be positive and finite");
    out.push_back(std::log10(x));
  }
  return out;
}

double norm_scale(const RateSample& s, RateNormalization norm) {
  return norm == RateNormalization::GSURECond ? s.m * s.cond * s.cond : static_cast<double>(s.m);
}

}  // namespace

ErrorStats describe(std::vector<double> values) {
  require(!values.empty(), "describe: no values");
  ErrorStats s;
  s.count = static_cast<int>(values.size());
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / static_cast<double>(n);
  if (n > 1) {
    CompensatedSum ss;
    for (double v : values) ss.add((v - s.mean) * (v - s.mean));
    s.std = std::sqrt(ss.value() / static_cast<double>(n - 1));
  }
  return s;
}

std::vector<double> rule_errors(const StudyResult& study, Rule rule, ErrorMetric metric) {
  require(metric != ErrorMetric::L2Prediction, "rule_errors: prediction errors are not stored per draw");
  const int col = study.rule_column(rule);
  std::vector<double> out;
  out.reserve(study.records.size());
  for (const auto& r : study.records) {
    const auto& o = r.outcomes[static_cast<std::size_t>(col)];
    out.push_back(metric == ErrorMetric::L1 ? o.error_l1 : o.error_l2);
  }
  return out;
}

std::vector<double> rule_alphas(const StudyResult& study, Rule rule) {
  const int col = study.rule_column(rule);
  std::vector<double> out;
  out.reserve(study.records.size());
  for (const auto& r : study.records) out.push_back(r.outcomes[static_cast<std::size_t>(col)].alpha);
  return out;
}

ErrorStats error_stats(const StudyResult& study, Rule rule, ErrorMetric metric) {
  return describe(rule_errors(study, rule, metric));
}

double win_fraction(const StudyResult& study, Rule rule_a, Rule rule_b, ErrorMetric metric) {
  const auto a = rule_errors(study, rule_a, metric);
  const auto b = rule_errors(study, rule_b, metric);
  require(!a.empty(), "win_fraction: no records");
  double wins = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) wins += 1.0;
    else if (a[k] == b[k]) wins += 0.5;
  }
  return wins / static_cast<double>(a.size());
}

std::vector<double> Histogram::probabilities() const {
  std::vector<double> p(counts.size(), 0.0);
  if (total == 0) return p;
  for (std::size_t k = 0; k < counts.size(); ++k) p[k] = static_cast<double>(counts[k]) / total;
  return p;
}

double Histogram::infinite_probability() const {
  return total ? static_cast<double>(infinite_count) / total : 0.0;
}

std::vector<double> Histogram::display_probabilities() const {
  auto p = probabilities();
  const double floor = total ? 1.0 / (2.0 * total) : 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (counts[k] == 0) p[k] = floor;
  return p;
}

Histogram alpha_histogram(const std::vector<double>& alphas, const AlphaGrid& grid) {
  const AlphaGrid fin = grid.finite_part();
  std::vector<double> centers;
  for (double a : fin.values()) centers.push_back(std::log10(a));
  Histogram h;
  if (centers.size() == 1) {
    h.edges = {centers[0] - 0.5, centers[0] + 0.5};
  } else {
    h.edges.push_back(centers[0] - 0.5 * (centers[1] - centers[0]));
    for (std::size_t k = 0; k + 1 < centers.size(); ++k) h.edges.push_back(0.5 * (centers[k] + centers[k + 1]));
    const std::size_t last = centers.size() - 1;
    h.edges.push_back(centers[last] + 0.5 * (centers[last] - centers[last - 1]));
  }
  h.counts.assign(centers.size(), 0);
  for (double a : alphas) {
    ++h.total;
    if (std::isinf(a)) {
      ++h.infinite_count;
      continue;
    }
    require(a > 0.0, "alpha_histogram: alpha must be positive");
    int k = bin_of(h.edges, std::log10(a));
    // Off-grid alphas (refined DP roots) outside the lattice go to the end bins.
    if (k < 0) k = std::log10(a) < h.edges.front() ? 0 : static_cast<int>(h.counts.size()) - 1;
    ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

Histogram log_histogram(const std::vector<double>& values, int bins) {
  require(bins >= 1, "log_histogram: bins must be positive");
  require(!values.empty(), "log_histogram: no values");
  const auto lv = log10_all(values);
  const auto [lo, hi] = std::minmax_element(lv.begin(), lv.end());
  Histogram h;
  h.edges = uniform_edges(*lo, *hi, bins);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : lv) {
    ++h.counts[static_cast<std::size_t>(bin_of(h.edges, v))];
    ++h.total;
  }
  return h;
}

std::vector<double> JointHistogram::display_log10_probabilities() const {
  std::vector<double> out(counts.size());
  const double floor = 1.0 / (2.0 * static_cast<double>(total));
  for (std::size_t k = 0; k < counts.size(); ++k)
    out[k] = std::log10(counts[k] ? static_cast<double>(counts[k]) / total : floor);
  return out;
}

Histogram JointHistogram::marginal_x() const {
  Histogram h;
  h.edges = x_edges;
  h.counts.assign(static_cast<std::size_t>(nx()), 0);
  for (int i = 0; i < nx(); ++i)
    for (int j = 0; j < ny(); ++j) h.counts[static_cast<std::size_t>(i)] += at(i, j);
  h.total = total;
  return h;
}

Histogram JointHistogram::marginal_y() const {
  Histogram h;
  h.edges = y_edges;
  h.counts.assign(static_cast<std::size_t>(ny()), 0);
  for (int i = 0; i < nx(); ++i)
    for (int j = 0; j < ny(); ++j) h.counts[static_cast<std::size_t>(j)] += at(i, j);
  h.total = total;
  return h;
}

JointHistogram joint_histogram(const std::vector<double>& xs, const std::vector<double>& ys, int bins) {
  require(xs.size() == ys.size() && !xs.empty(), "joint_histogram: need paired, nonempty samples");
  require(bins >= 1, "joint_histogram: bins must be positive");
  const auto lx = log10_all(xs);
  const auto ly = log10_all(ys);
  const auto [xlo, xhi] = std::minmax_element(lx.begin(), lx.end());
  const auto [ylo, yhi] = std::minmax_element(ly.begin(), ly.end());
  JointHistogram h;
  h.x_edges = uniform_edges(*xlo, *xhi, bins);
  h.y_edges = uniform_edges(*ylo, *yhi, bins);
  h.counts.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0);
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const int ix = bin_of(h.x_edges, lx[k]);
    const int iy = bin_of(h.y_edges, ly[k]);
    ++h.counts[static_cast<std::size_t>(ix * bins + iy)];
    ++h.total;
  }
  return h;
}

JointHistogram joint_histogram(const StudyResult& study, Rule rule_a, Rule rule_b, int bins,
                               ErrorMetric metric) {
  return joint_histogram(rule_errors(study, rule_a, metric), rule_errors(study, rule_b, metric), bins);
}

std::string_view normalization_name(RateNormalization n) {
  switch (n) {
    case RateNormalization::PSURE: return "psure";
    case RateNormalization::GSURECond: return "gsure_cond";
    case RateNormalization::GSUREPlain: return "gsure_plain";
  }
  return "unknown";
}

RateNormalization parse_normalization(std::string_view name) {
  for (auto n : {RateNormalization::PSURE, RateNormalization::GSURECond, RateNormalization::GSUREPlain})
    if (normalization_name(n) == name) return n;
  throw std::invalid_argument("unknown normalization '" + std::string(name) + "'");
}

RateSample rate_sample(const StudyResult& study, RateNormalization norm) {
  RateSample s;
  s.m = study.config.m;
  s.cond = study.cond;
  for (const auto& r : study.records) {
    const double v = norm == RateNormalization::PSURE ? r.sup_dev_psure : r.sup_dev_gsure;
    require(!std::isnan(v), "rate_sample: study was run without sup statistics");
    s.sups.push_back(v);
  }
  return s;
}

double rate_statistic(const RateSample& sample, RateNormalization norm) {
  require(!sample.sups.empty(), "rate_statistic: no samples");
  CompensatedSum sum;
  for (double v : sample.sups) sum.add(v);
  const double mean = sum.value() / static_cast<double>(sample.sups.size()) / norm_scale(sample, norm);
  return mean * mean;
}

double rate_statistic_second_moment(const RateSample& sample, RateNormalization norm) {
  require(!sample.sups.empty(), "rate_statistic: no samples");
  const double s = norm_scale(sample, norm);
  CompensatedSum sum;
  for (double v : sample.sups) sum.add((v / s) * (v / s));
  return sum.value() / static_cast<double>(sample.sups.size());
}

LineFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), "fit_loglog: size mismatch");
  require(xs.size() >= 2, "fit_loglog: need at least 2 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    require(xs[k] > 0.0 && ys[k] > 0.0, "fit_loglog: values must be positive");
    mx += std::log(xs[k]);
    my += std::log(ys[k]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = std::log(xs[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(ys[k]) - my);
  }
  require(sxx > 0.0, "fit_loglog: x values must not all be equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

RateFit rate_check(const std::vector<RateSample>& samples, RateNormalization norm) {
  require(samples.size() >= 2, "rate_check: need at least 2 values of m");
  RateFit out;
  out.normalization = norm;
  std::vector<double> xs;
  for (const auto& s : samples) {
    out.ms.push_back(s.m);
    xs.push_back(s.m);
    out.statistics.push_back(rate_statistic(s, norm));
    out.second_moments.push_back(rate_statistic_second_moment(s, norm));
  }
  out.fit = fit_loglog(xs, out.statistics);
  return out;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: no values");
  require(q >= 0.0 && q <= 1.0, "quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LossCloseness loss_closeness_stats(const std::vector<const StudyResult*>& studies) {
  require(!studies.empty(), "loss_closeness_stats: no studies");
  LossCloseness out;
  std::vector<double> ms, psure_med, gsure_med;
  for (const StudyResult* s : studies) {
    std::vector<double> p, g;
    for (const auto& r : s->records) {
      require(!std::isnan(r.sup_loss_psure), "loss_closeness_stats: study was run without sup statistics");
      p.push_back(r.sup_loss_psure);
      g.push_back(r.sup_loss_gsure);
    }
    LossClosenessRow row;
    row.m = s->config.m;
    row.psure_q10 = quantile(p, 0.1);
    row.psure_median = quantile(p, 0.5);
    row.psure_q90 = quantile(p, 0.9);
    row.gsure_q10 = quantile(g, 0.1);
    row.gsure_median = quantile(g, 0.5);
    row.gsure_q90 = quantile(g, 0.9);
    row.rate_psure = 1.0 / std::sqrt(static_cast<double>(row.m));
    row.rate_gsure = s->scaling.d_m;
    out.rows.push_back(row);
    ms.push_back(row.m);
    psure_med.push_back(row.psure_median);
    gsure_med.push_back(row.gsure_median);
  }
  if (ms.size() >= 2) {
    out.psure_median_fit = fit_loglog(ms, psure_med);
    out.gsure_median_fit = fit_loglog(ms, gsure_med);
  }
  return out;
}

}  // namespace riskest
