#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace riskest {

inline constexpr double kDefaultRankTol = 1e-12;

/// Full singular system A = U diag(gammas) V^T with a fixed sign convention
/// (first nonzero entry of each left singular vector positive).
struct SpectralDecomposition {
  Eigen::MatrixXd U;        // m x m
  Eigen::MatrixXd V;        // n x n
  Eigen::VectorXd gammas;   // q = min(m, n), descending
  int rank = 0;             // #{gamma_i > rank_tol * gamma_1}
  double cond = 0.0;        // gamma_1 / gamma_rank
  double rank_tol = kDefaultRankTol;

  int m() const { return static_cast<int>(U.rows()); }
  int n() const { return static_cast<int>(V.rows()); }
  int q() const { return static_cast<int>(gammas.size()); }

  /// Singular value seen by the risk formulas: gamma_i below the rank cut is treated as 0.
  double effective_gamma(int i) const { return i < rank ? gammas[i] : 0.0; }
};

SpectralDecomposition decompose(const Eigen::MatrixXd& A, double rank_tol = kDefaultRankTol);

/// Singular values only (descending); cheaper than decompose() for large matrices.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& A);

/// y_i = <u_i, y>, x*_i = <v_i, x*>, and eps_i = y_i - gamma_i x*_i (the
/// rotated noise when y = A x* + eps).
struct SpectralCoords {
  Eigen::VectorXd y;
  Eigen::VectorXd x_star;
  Eigen::VectorXd eps;
};

SpectralCoords to_spectral(const SpectralDecomposition& dec, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& x_star);

// Per-component Tikhonov factors. alpha may be +inf; gamma = 0 marks a
// component outside the effective range of A.

/// alpha / (gamma^2 + alpha): the residual retained in component i.
inline double residual_factor(double gamma, double alpha) {
  if (gamma == 0.0) return 1.0;
  if (std::isinf(alpha)) return 1.0;
  return alpha / (gamma * gamma + alpha);
}

/// gamma / (gamma^2 + alpha): the Tikhonov filter applied to y_i.
inline double tikhonov_filter(double gamma, double alpha) {
  if (gamma == 0.0 || std::isinf(alpha)) return 0.0;
  return gamma / (gamma * gamma + alpha);
}

struct TikhonovSolution {
  Eigen::VectorXd coeffs;  // in the V basis
  Eigen::VectorXd x;       // physical basis
};

/// x_alpha = (A^T A + alpha I)^{-1} A^T y in spectral form; alpha = 0 gives x_ML.
TikhonovSolution tikhonov_solve(const SpectralDecomposition& dec, const SpectralCoords& coords,
                                double alpha);

/// ||A x_alpha - y||^2.
double residual_norm_sq(const SpectralDecomposition& dec, const SpectralCoords& coords,
                        double alpha);

/// tr(A (A^T A + alpha I)^{-1} A^T).
double df(const SpectralDecomposition& dec, double alpha);

/// tr((A A^T)^+ A (A^T A + alpha I)^{-1} A^T).
double gdf(const SpectralDecomposition& dec, double alpha);

/// Sum of 1/gamma_i^2 over the effective rank, i.e. tr((A A^T)^+).
double trace_pinv_gram(const SpectralDecomposition& dec);

}  // namespace riskest
