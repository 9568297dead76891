#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riskest/alpha_grid.hpp"
#include "riskest/spectral.hpp"

namespace riskest {

enum class Rule { Oracle, DP, PSURE, SURE, MSPEOracle, MSEEOracle };

std::string_view rule_name(Rule r);
Rule parse_rule(std::string_view name);
/// Comma-separated list, e.g. "dp,psure,sure,oracle".
std::vector<Rule> parse_rules(std::string_view list);

enum class ErrorMetric { L2Estimation, L2Prediction, L1 };

std::string_view metric_name(ErrorMetric m);
ErrorMetric parse_metric(std::string_view name);

struct RuleSelection {
  Rule rule = Rule::Oracle;
  double alpha_hat = 0.0;
  /// Grid index of alpha_hat; for DP the grid point at or above the refined root.
  int index = 0;
  double objective_value = 0.0;
  bool at_boundary = false;
};

// Single-alpha objectives. alpha may be +inf throughout.

/// ||A x_alpha - y||^2 - m sigma^2.
double dp_value(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma);
/// ||A x_alpha - y||^2 - m sigma^2 + 2 sigma^2 df_alpha.
double psure_value(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma);
/// Unbiased estimate of E||Pi (x_alpha - x*)||^2 (the projected estimation risk).
double gsure_value(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma);

/// E[dp_value]; only the x* coordinates of `c` are used.
double edp_true(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma);
/// E||A(x_alpha - x*)||^2.
double mspe_true(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma);
/// E||Pi (x_alpha - x*)||^2.
double msee_true(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha, double sigma);

/// ||x_alpha - x*||^2 for the realization in `c` (including null-space components of x*).
double estimation_error_sq(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha);
/// ||Pi (x_alpha - x*)||^2.
double projected_error_sq(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha);
/// ||A (x_alpha - x*)||^2.
double prediction_error_sq(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha);
/// ||x_alpha - x*||_1 (physical basis).
double l1_error(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha);

/// Prediction loss (1/m) ||A(x* - x_alpha)||^2.
double loss_l(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha);
/// Estimation loss c_m ||Pi (x* - x_alpha)||^2.
double loss_tilde(const SpectralDecomposition& dec, const SpectralCoords& c, double alpha);

struct LossScaling {
  double c_m = 0.0;  // (sum 1/gamma_i^2)^{-1}
  double d_m = 0.0;  // c_m * sqrt(sum 1/gamma_i^4)
};
LossScaling loss_scaling(const SpectralDecomposition& dec);

/// Grid argmin of objective(k) over k = 0 .. grid.size()-1; ties go to the
/// larger alpha. Throws NumericError if any value is not finite.
RuleSelection select_by_minimization(const std::vector<double>& objective, const AlphaGrid& grid,
                                     Rule rule);
RuleSelection select_by_minimization(const std::function<double(double)>& objective,
                                     const AlphaGrid& grid, Rule rule);

/// Discrepancy principle: smallest grid alpha with dp >= 0, refined by
/// log-space bisection against the previous grid point.
RuleSelection dp_select(const SpectralDecomposition& dec, const SpectralCoords& c,
                        const AlphaGrid& grid, double sigma, double rel_tol = 1e-6);

/// Grid argmin of the true error against x*.
RuleSelection oracle_select(const SpectralDecomposition& dec, const SpectralCoords& c,
                            const AlphaGrid& grid, ErrorMetric metric);

/// Bracket [lower, upper] for the MSPE minimizer.
std::pair<double, double> psure_alpha_bounds(const SpectralDecomposition& dec,
                                             const Eigen::VectorXd& x_star_coords, double sigma);

}  // namespace riskest
