#include "riskest/spectral.hpp"

#include <sstream>

#include "riskest/numeric.hpp"

namespace riskest {

namespace {

void require_finite(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) throw std::invalid_argument("decompose: matrix has non-finite entries");
}

}  // namespace

SpectralDecomposition decompose(const Eigen::MatrixXd& A, double rank_tol) {
  require_finite(A);
  require(rank_tol >= 0.0, "decompose: rank_tol must be nonnegative");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "decompose: SVD did not converge for " << A.rows() << "x" << A.cols()
        << " matrix (max |a_ij| = " << A.cwiseAbs().maxCoeff() << ")";
    throw NumericError(msg.str());
  }

  SpectralDecomposition dec;
  dec.U = svd.matrixU();
  dec.V = svd.matrixV();
  dec.gammas = svd.singularValues();
  dec.rank_tol = rank_tol;

  // Sign convention: first nonzero entry of u_i positive, v_i flipped alongside.
  for (int i = 0; i < dec.q(); ++i) {
    for (int k = 0; k < dec.m(); ++k) {
      if (dec.U(k, i) != 0.0) {
        if (dec.U(k, i) < 0.0) {
          dec.U.col(i) *= -1.0;
          dec.V.col(i) *= -1.0;
        }
        break;
      }
    }
  }

  const double g1 = dec.q() > 0 ? dec.gammas[0] : 0.0;
  dec.rank = 0;
  for (int i = 0; i < dec.q(); ++i) {
    if (dec.gammas[i] > rank_tol * g1 && dec.gammas[i] > 0.0) ++dec.rank;
  }
  dec.cond = dec.rank > 0 ? g1 / dec.gammas[dec.rank - 1] : std::numeric_limits<double>::infinity();
  return dec;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
  require_finite(A);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  if (svd.info() != Eigen::Success) throw NumericError("singular_values: SVD did not converge");
  return svd.singularValues();
}

SpectralCoords to_spectral(const SpectralDecomposition& dec, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& x_star) {
  require(y.size() == dec.m(), "to_spectral: y has wrong dimension");
  require(x_star.size() == dec.n(), "to_spectral: x_star has wrong dimension");
  SpectralCoords c;
  c.y = dec.U.transpose() * y;
  c.x_star = dec.V.transpose() * x_star;
  c.eps = c.y;
  for (int i = 0; i < dec.q(); ++i) c.eps[i] -= dec.gammas[i] * c.x_star[i];
  return c;
}

TikhonovSolution tikhonov_solve(const SpectralDecomposition& dec, const SpectralCoords& coords,
                                double alpha) {
  require(alpha >= 0.0, "tikhonov_solve: alpha must be nonnegative");
  TikhonovSolution s;
  s.coeffs = Eigen::VectorXd::Zero(dec.n());
  for (int i = 0; i < dec.rank; ++i) s.coeffs[i] = tikhonov_filter(dec.gammas[i], alpha) * coords.y[i];
  s.x = dec.V * s.coeffs;
  return s;
}

double residual_norm_sq(const SpectralDecomposition& dec, const SpectralCoords& coords,
                        double alpha) {
  require(alpha >= 0.0, "residual_norm_sq: alpha must be nonnegative");
  CompensatedSum acc;
  for (int i = 0; i < dec.m(); ++i) {
    const double t = residual_factor(dec.effective_gamma(i), alpha);
    acc.add(t * t * coords.y[i] * coords.y[i]);
  }
  return acc.value();
}

double df(const SpectralDecomposition& dec, double alpha) {
  require(alpha >= 0.0, "df: alpha must be nonnegative");
  if (std::isinf(alpha)) return 0.0;
  CompensatedSum acc;
  for (int i = 0; i < dec.rank; ++i) {
    const double g2 = dec.gammas[i] * dec.gammas[i];
    acc.add(g2 / (g2 + alpha));
  }
  return acc.value();
}

double gdf(const SpectralDecomposition& dec, double alpha) {
  require(alpha >= 0.0, "gdf: alpha must be nonnegative");
  if (std::isinf(alpha)) return 0.0;
  CompensatedSum acc;
  for (int i = 0; i < dec.rank; ++i) acc.add(1.0 / (dec.gammas[i] * dec.gammas[i] + alpha));
  return acc.value();
}

double trace_pinv_gram(const SpectralDecomposition& dec) { return gdf(dec, 0.0); }

}  // namespace riskest
