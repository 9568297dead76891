#include "riskest/lasso.hpp"

#include <cmath>
#include <sstream>

#include "riskest/numeric.hpp"
#include "riskest/spectral.hpp"

namespace riskest {

namespace {

std::string describe_support(const std::vector<int>& support) {
  std::ostringstream s;
  s << "{";
  for (std::size_t k = 0; k < support.size(); ++k) s << (k ? "," : "") << support[k];
  s << "}";
  return s.str();
}

Eigen::LLT<Eigen::MatrixXd> factor_shifted_gram(const Eigen::MatrixXd& gram, double rho) {
  Eigen::MatrixXd M = gram;
  M.diagonal().array() += rho;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericError("admm: factorization of A^T A + rho I failed (rho = " + std::to_string(rho) + ")");
  }
  return llt;
}

}  // namespace

void AdmmParams::validate() const {
  require(rho > 0.0 && std::isfinite(rho), "AdmmParams: rho must be positive");
  require(tau > 1.0, "AdmmParams: tau must exceed 1");
  require(mu > 1.0, "AdmmParams: mu must exceed 1");
  require(max_iter >= 1, "AdmmParams: max_iter must be positive");
  require(tol >= 0.0, "AdmmParams: tol must be nonnegative");
}

AdmmParams AdmmParams::short_run() {
  AdmmParams p;
  p.max_iter = 20;
  p.tol = 0.0;
  p.adapt = false;
  return p;
}

bool LassoPath::all_converged() const {
  for (bool c : converged) if (!c) return false;
  return true;
}

LassoPath admm_all_at_once(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                           const std::vector<double>& alphas, const AdmmParams& params) {
  params.validate();
  require(y.size() == A.rows(), "admm: y has wrong dimension");
  require(!alphas.empty(), "admm: empty alpha grid");
  for (double a : alphas) require(a > 0.0 && std::isfinite(a), "admm: alphas must be finite and positive");

  const Eigen::Index n = A.cols();
  const Eigen::Index na = static_cast<Eigen::Index>(alphas.size());
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXd gram = A.transpose() * A;
  const Eigen::VectorXd aty = A.transpose() * y;
  const Eigen::Map<const Eigen::VectorXd> lambda(alphas.data(), na);

  double rho = params.rho;
  auto llt = factor_shifted_gram(gram, rho);

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, na);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, na);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, na);
  Eigen::MatrixXd Z_old(n, na), rhs(n, na);
  Eigen::VectorXd r_norm(na), s_norm(na);

  LassoPath path;
  path.converged.assign(static_cast<std::size_t>(na), false);

  for (int k = 1; k <= params.max_iter; ++k) {
    // x-update
    rhs = rho * (Z - U);
    rhs.colwise() += aty;
    X = llt.solve(rhs);

    // z-update
    Z_old.swap(Z);
    for (Eigen::Index i = 0; i < na; ++i) {
      const double thr = lambda[i] / rho;
      for (Eigen::Index j = 0; j < n; ++j) Z(j, i) = soft_threshold(X(j, i) + U(j, i), thr);
    }

    // u-update and residuals
    U += X - Z;
    r_norm = (X - Z).colwise().norm().transpose();
    s_norm = (rho * (Z - Z_old)).colwise().norm().transpose();

    if (!X.allFinite() || !U.allFinite()) {
      throw NumericError("admm: non-finite iterate at iteration " + std::to_string(k) +
                         " (rho = " + std::to_string(rho) + ")");
    }

    // rho adaptation by majority vote over the columns
    if (params.adapt) {
      const Eigen::Index primal_votes = (r_norm.array() > params.mu * s_norm.array()).count();
      const Eigen::Index dual_votes = (s_norm.array() > params.mu * r_norm.array()).count();
      if (2 * primal_votes > na) {
        U /= params.tau;
        rho *= params.tau;
        llt = factor_shifted_gram(gram, rho);
        ++path.rho_changes;
      } else if (2 * dual_votes > na) {
        U *= params.tau;
        rho /= params.tau;
        llt = factor_shifted_gram(gram, rho);
        ++path.rho_changes;
      }
    }

    // stopping test
    bool all = true;
    for (Eigen::Index i = 0; i < na; ++i) {
      const double eps_pri = params.tol * (sqrt_n + std::max(X.col(i).norm(), Z.col(i).norm()));
      const double eps_dual = params.tol * (sqrt_n + rho * U.col(i).norm());
      const bool ok = r_norm[i] < eps_pri && s_norm[i] < eps_dual;
      path.converged[static_cast<std::size_t>(i)] = ok;
      all = all && ok;
    }
    path.iterations_used = k;
    if (all) break;
  }

  path.X = std::move(X);
  path.Z = std::move(Z);
  path.primal_norm = r_norm;
  path.dual_norm = s_norm;
  path.rho_final = rho;
  return path;
}

double lasso_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                       double alpha) {
  return 0.5 * (A * z - y).squaredNorm() + alpha * z.lpNorm<1>();
}

std::vector<int> support_of(const Eigen::VectorXd& z) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < z.size(); ++j)
    if (z[j] != 0.0) s.push_back(static_cast<int>(j));
  return s;
}

int lasso_df(const Eigen::VectorXd& z) { return static_cast<int>(support_of(z).size()); }

LassoRiskContext::LassoRiskContext(const Eigen::MatrixXd& A) : A_(A) {
  const SpectralDecomposition dec = decompose(A);
  const int r = dec.rank;
  const Eigen::MatrixXd Vr = dec.V.leftCols(r);
  const Eigen::MatrixXd Ur = dec.U.leftCols(r);
  const Eigen::VectorXd inv_g = dec.gammas.head(r).cwiseInverse();
  pinv_ = Vr * inv_g.asDiagonal() * Ur.transpose();
  pi_ = Vr * Vr.transpose();
  trace_pinv_gram_ = riskest::trace_pinv_gram(dec);
}

double LassoRiskContext::gdf(const std::vector<int>& support) const {
  if (support.empty()) return 0.0;
  const Eigen::Index k = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd AI(A_.rows(), k);
  Eigen::MatrixXd PiII(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    require(support[a] >= 0 && support[a] < A_.cols(), "lasso_gdf: support index out of range");
    AI.col(a) = A_.col(support[a]);
    for (Eigen::Index b = 0; b < k; ++b) PiII(a, b) = pi_(support[a], support[b]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(AI);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) {
    throw NumericError("lasso_gdf: A restricted to support " + describe_support(support) +
                       " is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                       std::to_string(k) + ")");
  }
  const Eigen::MatrixXd gram = AI.transpose() * AI;
  const Eigen::MatrixXd sol = gram.ldlt().solve(PiII);  // (A_I^T A_I)^{-1} Pi_II
  return sol.trace();
}

double LassoRiskContext::psure(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double sigma) const {
  const double s2 = sigma * sigma;
  return (y - A_ * z).squaredNorm() - A_.rows() * s2 + 2.0 * s2 * lasso_df(z);
}

double LassoRiskContext::gsure(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double sigma) const {
  return gsure_from_ml(pinv_ * y, z, sigma);
}

double LassoRiskContext::gsure_from_ml(const Eigen::VectorXd& x_ml, const Eigen::VectorXd& z,
                                       double sigma) const {
  const double s2 = sigma * sigma;
  return (x_ml - z).squaredNorm() - s2 * trace_pinv_gram_ + 2.0 * s2 * gdf(support_of(z));
}

double lasso_gdf(const Eigen::MatrixXd& A, const std::vector<int>& support) {
  return LassoRiskContext(A).gdf(support);
}

double lasso_psure_value(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z, double sigma) {
  const double s2 = sigma * sigma;
  return (y - A * z).squaredNorm() - A.rows() * s2 + 2.0 * s2 * lasso_df(z);
}

double lasso_gsure_value(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z, double sigma) {
  return LassoRiskContext(A).gsure(y, z, sigma);
}

}  // namespace riskest
