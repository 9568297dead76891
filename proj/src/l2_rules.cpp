#include "riskest/l2_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskest/numeric.hpp"

namespace riskest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Expectation of y_i^2 under the model, with sub-rank components treated as pure noise.
double expected_y_sq(const SpectralDecomposition& dec, const SpectralCoords& c, int i, double sigma) {
  const double g = dec.effective_gamma(i);
  const double xs = i < c.x_star.size() ? c.x_star[i] : 0.0;
  return g * g * xs * xs + sigma * sigma;
}

// Coefficient i of x_alpha - x* in the V basis, written through the noise
// coordinate so that nothing cancels.
double error_coeff(const SpectralDecomposition& dec, const SpectralCoords& c, int i, double alpha) {
  const double xs = c.x_star[i];
  if (i >= dec.rank) return -xs;
  const double g = dec.gammas[i];
  return tikhonov_filter(g, alpha) * c.eps[i] - residual_factor(g, alpha) * xs;
}

void check_gsure_guard(const SpectralDecomposition& dec) {
  if (dec.rank == 0) return;
  const double g = dec.gammas[dec.rank - 1];
  if (!std::isfinite(1.0 / (g * g * g * g))) {
    std::ostringstream msg;
    msg << "gsure: smallest retained singular value " << g << " underflows (cond(A) = " << dec.cond
        << "); raise rank_tol";
    throw NumericError(msg.str());
  }
}

}  // namespace

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::Oracle: return "oracle";
    case Rule::DP: return "dp";
    case Rule::PSURE: return "psure";
    case Rule::SURE: return "sure";
    case Rule::MSPEOracle: return "mspe_oracle";
    case Rule::MSEEOracle: return "msee_oracle";
  }
  return "unknown";
}

Rule parse_rule(std::string_view name) {
  for (Rule r : {Rule::Oracle, Rule::DP, Rule::PSURE, Rule::SURE, Rule::MSPEOracle, Rule::MSEEOracle}) {
    if (rule_name(r) == name) return r;
  }
  if (name == "gsure") return Rule::SURE;
  throw std::invalid_argument("unknown rule '" + std::string(name) + "'");
}

std::vector<Rule> parse_rules(std::string_view list) {
  std::vector<Rule> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto token = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (!token.empty()) {
      const Rule r = parse_rule(token);
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  require(!out.empty(), "empty rule list");
  return out;
}

std::string_view metric_name(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::L2Estimation: return "l2_estimation";
    case ErrorMetric::L2Prediction: return "l2_prediction";
    case ErrorMetric::L1: return "l1";
  }
  return "unknown";
}

ErrorMetric parse_metric(std::string_view name) {
  for (ErrorMetric m : {ErrorMetric::L2Estimation, ErrorMetric::L2Prediction, ErrorMetric::L1}) {
    if (metric_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

double dp_value(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma) {
  return residual_norm_sq(dec, c, alpha) - dec.m() * sigma * sigma;
}

double psure_value(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha,
                   double sigma) {
  return dp_value(dec, c, alpha, sigma) + 2.0 * sigma * sigma * df(dec, alpha);
}

double gsure_value(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha,
                   double sigma) {
  require(alpha >= 0.0, "gsure_value: alpha must be nonnegative");
  check_gsure_guard(dec);
  const double s2 = sigma * sigma;
  CompensatedSum acc;
  for (int i = 0; i < dec.rank; ++i) {
    const double g = dec.gammas[i];
    // 1/g - g/(g^2 + alpha) = t/g.
    const double w = residual_factor(g, alpha) / g;
    acc.add(w * w * c.y[i] * c.y[i] - s2 / (g * g));
    if (!std::isinf(alpha)) acc.add(2.0 * s2 / (g * g + alpha));
  }
  return acc.value();
}

double edp_true(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma) {
  require(alpha >= 0.0, "edp_true: alpha must be nonnegative");
  CompensatedSum acc;
  for (int i = 0; i < dec.m(); ++i) {
    const double t = residual_factor(dec.effective_gamma(i), alpha);
    acc.add(t * t * expected_y_sq(dec, c, i, sigma));
  }
  acc.add(-dec.m() * sigma * sigma);
  return acc.value();
}

double mspe_true(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha,
                 double sigma) {
  return edp_true(dec, c, alpha, sigma) + 2.0 * sigma * sigma * df(dec, alpha);
}

double msee_true(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha,
                 double sigma) {
  require(alpha >= 0.0, "msee_true: alpha must be nonnegative");
  CompensatedSum acc;
  for (int i = 0; i < dec.rank; ++i) {
    const double g = dec.gammas[i];
    const double t = residual_factor(g, alpha);
    const double f = tikhonov_filter(g, alpha);
    acc.add(t * t * c.x_star[i] * c.x_star[i] + f * f * sigma * sigma);
  }
  return acc.value();
}

double estimation_error_sq(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha) {
  require(alpha >= 0.0, "estimation_error_sq: alpha must be nonnegative");
  CompensatedSum acc;
  for (int i = 0; i < dec.n(); ++i) {
    const double e = error_coeff(dec, c, i, alpha);
    acc.add(e * e);
  }
  return acc.value();
}

double projected_error_sq(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha) {
  require(alpha >= 0.0, "projected_error_sq: alpha must be nonnegative");
  CompensatedSum acc;
  for (int i = 0; i < dec.rank; ++i) {
    const double e = error_coeff(dec, c, i, alpha);
    acc.add(e * e);
  }
  return acc.value();
}

double prediction_error_sq(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha) {
  require(alpha >= 0.0, "prediction_error_sq: alpha must be nonnegative");
  CompensatedSum acc;
  for (int i = 0; i < dec.rank; ++i) {
    const double e = dec.gammas[i] * error_coeff(dec, c, i, alpha);
    acc.add(e * e);
  }
  return acc.value();
}

double l1_error(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha) {
  require(alpha >= 0.0, "l1_error: alpha must be nonnegative");
  Eigen::VectorXd coeff(dec.n());
  for (int i = 0; i < dec.n(); ++i) coeff[i] = error_coeff(dec, c, i, alpha);
  return (dec.V * coeff).lpNorm<1>();
}

double loss_l(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha) {
  return prediction_error_sq(dec, c, alpha) / dec.m();
}

double loss_tilde(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha) {
  return loss_scaling(dec).c_m * projected_error_sq(dec, c, alpha);
}

LossScaling loss_scaling(const SpectralDecomposition& dec) {
  require(dec.rank > 0, "loss_scaling: matrix has rank 0");
  CompensatedSum inv2, inv4;
  for (int i = 0; i < dec.rank; ++i) {
    const double g2 = dec.gammas[i] * dec.gammas[i];
    inv2.add(1.0 / g2);
    inv4.add(1.0 / (g2 * g2));
  }
  LossScaling s;
  s.c_m = 1.0 / inv2.value();
  s.d_m = s.c_m * std::sqrt(inv4.value());
  return s;
}

RuleSelection select_by_minimization(const std::vector<double>& objective, const AlphaGrid& grid,
                                     Rule rule) {
  require(static_cast<int>(objective.size()) == grid.size(),
          "select_by_minimization: objective size does not match grid");
  int best = -1;
  for (int k = 0; k < grid.size(); ++k) {
    const double v = objective[static_cast<std::size_t>(k)];
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "select_by_minimization(" << rule_name(rule) << "): objective is " << v
          << " at alpha = " << grid[k] << " (grid index " << k << ")";
      throw NumericError(msg.str());
    }
    if (best < 0 || v <= objective[static_cast<std::size_t>(best)]) best = k;
  }
  RuleSelection s;
  s.rule = rule;
  s.index = best;
  s.alpha_hat = grid[best];
  s.objective_value = objective[static_cast<std::size_t>(best)];
  s.at_boundary = best == 0 || best == grid.size() - 1;
  return s;
}

RuleSelection select_by_minimization(const std::function<double(double)>& objective,
                                     const AlphaGrid& grid, Rule rule) {
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) values[static_cast<std::size_t>(k)] = objective(grid[k]);
  return select_by_minimization(values, grid, rule);
}

RuleSelection dp_select(const SpectralDecomposition& dec, const SpectralCoords& c,
                        const AlphaGrid& grid, double sigma, double rel_tol) {
  require(rel_tol > 0.0, "dp_select: rel_tol must be positive");
  auto dp = [&](double a) { return dp_value(dec, c, a, sigma); };
  RuleSelection s;
  s.rule = Rule::DP;

  if (dp(kInf) < 0.0) {
    s.alpha_hat = kInf;
    s.index = grid.size() - 1;
    s.objective_value = dp(kInf);
    s.at_boundary = true;
    return s;
  }
  if (dp(grid[0]) >= 0.0) {
    s.alpha_hat = grid[0];
    s.index = 0;
    s.objective_value = dp(grid[0]);
    s.at_boundary = true;
    return s;
  }

  // dp is nondecreasing in alpha: binary search for the first finite grid point with dp >= 0.
  const int nf = grid.finite_size();
  int lo = 0, hi = nf;  // dp(grid[lo]) < 0; hi is the answer candidate (nf = none on the finite part)
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (dp(grid[mid]) >= 0.0) hi = mid; else lo = mid;
  }

  double a_lo = grid[lo];
  double a_hi;
  if (hi < nf) {
    a_hi = grid[hi];
    s.index = hi;
  } else {
    // Root lies beyond the last finite grid point: expand the bracket upward.
    a_hi = a_lo;
    do {
      a_lo = a_hi;
      a_hi *= 1e3;
    } while (std::isfinite(a_hi) && dp(a_hi) < 0.0);
    if (!std::isfinite(a_hi)) a_hi = std::numeric_limits<double>::max();
    s.index = grid.size() - 1;
    s.at_boundary = true;
  }

  while (a_hi / a_lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(a_lo) * std::sqrt(a_hi);
    if (mid <= a_lo || mid >= a_hi) break;
    if (dp(mid) >= 0.0) a_hi = mid; else a_lo = mid;
  }
  s.alpha_hat = a_hi;
  s.objective_value = dp(a_hi);
  return s;
}

RuleSelection oracle_select(const SpectralDecomposition& dec, const SpectralCoords& c,
                            const AlphaGrid& grid, ErrorMetric metric) {
  switch (metric) {
    case ErrorMetric::L2Estimation:
      return select_by_minimization([&](double a) { return estimation_error_sq(dec, c, a); }, grid,
                                    Rule::Oracle);
    case ErrorMetric::L2Prediction:
      return select_by_minimization([&](double a) { return prediction_error_sq(dec, c, a); }, grid,
                                    Rule::Oracle);
    case ErrorMetric::L1:
      return select_by_minimization([&](double a) { return l1_error(dec, c, a); }, grid, Rule::Oracle);
  }
  throw std::invalid_argument("oracle_select: bad metric");
}

std::pair<double, double> psure_alpha_bounds(const SpectralDecomposition& dec,
                                             const Eigen::VectorXd& x_star_coords, double sigma) {
  require(x_star_coords.size() == dec.n(), "psure_alpha_bounds: x* has wrong dimension");
  const double xmax = x_star_coords.cwiseAbs().maxCoeff();
  require(xmax > 0.0, "psure_alpha_bounds: x* is identically zero");
  CompensatedSum g4, g4x2;
  for (int i = 0; i < dec.rank; ++i) {
    const double g2 = dec.gammas[i] * dec.gammas[i];
    g4.add(g2 * g2);
    g4x2.add(g2 * g2 * x_star_coords[i] * x_star_coords[i]);
  }
  const double s2 = sigma * sigma;
  const double lower = s2 / (xmax * xmax);
  const double upper = g4x2.value() > 0.0 ? std::max(1.0, 8.0 * s2 * g4.value() / g4x2.value()) : kInf;
  return {lower, upper};
}

}  // namespace riskest
