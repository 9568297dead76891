#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "riskest/alpha_grid.hpp"
#include "riskest/l2_rules.hpp"
#include "riskest/lasso.hpp"
#include "riskest/noise.hpp"
#include "riskest/problem.hpp"
#include "riskest/spectral.hpp"

namespace riskest {

enum class Regularizer { Quadratic, Lasso };

std::string_view regularizer_name(Regularizer r);
Regularizer parse_regularizer(std::string_view name);

struct StudyConfig {
  int m = 64;
  int n = 64;
  double l = 0.06;
  double sigma = 0.1;
  AlphaGrid grid = AlphaGrid::quadratic_default();
  int n_draws = 10000;
  std::uint64_t master_seed = 1;
  std::vector<Rule> rules = {Rule::Oracle, Rule::DP, Rule::PSURE, Rule::SURE};
  Regularizer regularizer = Regularizer::Quadratic;
  ErrorMetric oracle_metric = ErrorMetric::L2Estimation;
  int workers = 1;
  /// Record the sup-deviation statistics for every draw.
  bool compute_sup_stats = false;
  AdmmParams admm;
  QuadratureSettings quad;

  void validate() const;
};

struct RuleOutcome {
  double alpha = 0.0;
  int index = 0;
  double error_l2 = 0.0;  // ||x* - x_alpha||_2
  double error_l1 = 0.0;  // ||x* - x_alpha||_1
  bool at_boundary = false;
  double objective = 0.0;
};

struct StudyRecord {
  int draw_index = 0;
  std::uint64_t seed = 0;
  std::vector<RuleOutcome> outcomes;  // same order as StudyConfig::rules
  double sup_dev_psure = std::numeric_limits<double>::quiet_NaN();
  double sup_dev_gsure = std::numeric_limits<double>::quiet_NaN();
  double sup_loss_psure = std::numeric_limits<double>::quiet_NaN();
  double sup_loss_gsure = std::numeric_limits<double>::quiet_NaN();
};

struct StudyResult {
  StudyConfig config;
  std::vector<StudyRecord> records;
  double cond = 0.0;
  double gamma1 = 0.0;
  int rank = 0;
  LossScaling scaling;
  /// LASSO only: first-pass sample means of PSURE and SURE over the finite grid.
  std::vector<double> mean_psure;
  std::vector<double> mean_gsure;
  int admm_unconverged_draws = 0;

  /// Position of `rule` in config.rules; throws if absent.
  int rule_column(Rule rule) const;
};

/// Builds the problem, decomposes it once and runs all draws.
StudyResult run_study(const StudyConfig& config);

/// Same with a prebuilt problem (and decomposition for the quadratic case).
StudyResult run_study(const StudyConfig& config, const ProblemInstance& problem,
                      const SpectralDecomposition& dec);

/// LASSO study with known true risks (e.g. first-pass means from an earlier run);
/// the sup statistics are then computed in a single pass.
StudyResult run_lasso_study(const StudyConfig& config, const ProblemInstance& problem,
                            const SpectralDecomposition& dec,
                            const std::vector<double>* known_mean_psure,
                            const std::vector<double>* known_mean_gsure);

/// Noise draw `index` of a study: eps (zero when sigma = 0) and its seed.
NoiseDraw study_noise(double sigma, int m, std::uint64_t master_seed, int index);

/// y = A x* + eps for draw `index`.
Eigen::VectorXd study_data(const ProblemInstance& problem, std::uint64_t master_seed, int index);

// ---- linear-vs-log grid demonstration ----

struct GridScan {
  AlphaGrid grid;
  std::vector<double> sure;
  std::vector<double> true_loss;  // ||Pi(x_alpha - x*)||^2
  RuleSelection argmin;
};

struct GridDemoResult {
  int draw_index = 0;
  std::uint64_t seed = 0;
  std::uint64_t data_hash = 0;  // hash of y shared by both scans
  double alpha_dp = 0.0;
  double delta = 0.0;
  GridScan linear;
  GridScan log;
  /// alpha of the linear-grid argmin over alpha of the log-grid argmin.
  double alpha_ratio() const { return linear.argmin.alpha_hat / log.argmin.alpha_hat; }
  double loss_at_linear_argmin() const { return linear.true_loss[static_cast<std::size_t>(linear.argmin.index)]; }
  double loss_at_log_argmin() const { return log.true_loss[static_cast<std::size_t>(log.argmin.index)]; }
};

/// Quadratic: linear grid Delta, ..., 50 Delta with Delta = 2 alpha_DP / 50.
GridDemoResult grid_demo_quadratic(const ProblemInstance& problem, const SpectralDecomposition& dec,
                                   const AlphaGrid& log_grid, std::uint64_t master_seed, int draw);

/// LASSO: linear grid Delta, ..., 20 Delta with Delta = alpha_DP / 10, where
/// alpha_DP is the first log-grid point whose LASSO residual reaches m sigma^2.
/// `short_run_sure` receives the SURE curve of the 20-iteration fixed-rho solver
/// on the linear grid.
GridDemoResult grid_demo_lasso(const ProblemInstance& problem, const SpectralDecomposition& dec,
                               const AlphaGrid& log_grid, std::uint64_t master_seed, int draw,
                               const AdmmParams& admm, std::vector<double>* short_run_sure = nullptr);

}  // namespace riskest
