#pragma once

#include <vector>

#include <Eigen/Dense>

namespace riskest {

/// sign(v) * max(|v| - t, 0).
inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

struct AdmmParams {
  double rho = 1.0;      // initial penalty parameter
  double tau = 2.0;      // adaptation factor
  double mu = 1.1;       // residual-ratio threshold
  int max_iter = 10000;  // K
  double tol = 1e-14;    // stopping tolerance
  bool adapt = true;     // rho adaptation on/off

  void validate() const;

  /// Plain fixed-rho ADMM with 20 iterations and no stopping test.
  static AdmmParams short_run();
};

/// Solutions of min_x 0.5||Ax - y||^2 + alpha ||x||_1 for a whole alpha grid,
/// computed with one shared rho trajectory and one shared stopping rule.
struct LassoPath {
  Eigen::MatrixXd Z;  // n x N_alpha, exactly sparse (thresholding output)
  Eigen::MatrixXd X;  // n x N_alpha, x-update iterates
  int iterations_used = 0;
  std::vector<bool> converged;  // per column, tested at the last iteration
  Eigen::VectorXd primal_norm;  // ||r_i|| at the last iteration
  Eigen::VectorXd dual_norm;    // ||s_i|| at the last iteration
  double rho_final = 0.0;
  int rho_changes = 0;

  bool all_converged() const;
};

/// All-at-once scaled ADMM. Every alpha must be finite and positive.
LassoPath admm_all_at_once(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                           const std::vector<double>& alphas, const AdmmParams& params = {});

double lasso_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                       double alpha);

/// Indices j with z_j != 0 (exact test).
std::vector<int> support_of(const Eigen::VectorXd& z);

/// ||z||_0.
int lasso_df(const Eigen::VectorXd& z);

/// tr(Pi P_I (A_I^T A_I)^{-1} P_I^T), Pi = A^+ A. Throws NumericError when A_I is
/// rank deficient.
double lasso_gdf(const Eigen::MatrixXd& A, const std::vector<int>& support);

/// Caches A^+, Pi and tr((A A^T)^+) for repeated risk evaluations with one A.
class LassoRiskContext {
 public:
  explicit LassoRiskContext(const Eigen::MatrixXd& A);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& pinv() const { return pinv_; }
  const Eigen::MatrixXd& projector() const { return pi_; }
  double trace_pinv_gram() const { return trace_pinv_gram_; }

  double gdf(const std::vector<int>& support) const;
  /// ||y - Az||^2 - m sigma^2 + 2 sigma^2 ||z||_0.
  double psure(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double sigma) const;
  /// ||A^+ y - z||^2 - sigma^2 tr((AA^T)^+) + 2 sigma^2 gdf.
  double gsure(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double sigma) const;
  /// Same as gsure() with x_ML = A^+ y precomputed.
  double gsure_from_ml(const Eigen::VectorXd& x_ml, const Eigen::VectorXd& z, double sigma) const;

 private:
  Eigen::MatrixXd A_;
  Eigen::MatrixXd pinv_;
  Eigen::MatrixXd pi_;
  double trace_pinv_gram_ = 0.0;
};

double lasso_psure_value(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z, double sigma);
double lasso_gsure_value(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z, double sigma);

}  // namespace riskest
