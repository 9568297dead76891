#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testutil {

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = nd(gen);
  return M;
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

// Dense Tikhonov solution (A^T A + alpha I)^{-1} A^T y.
inline Eigen::VectorXd dense_tikhonov(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double alpha) {
  Eigen::MatrixXd M = A.transpose() * A;
  M.diagonal().array() += alpha;
  return M.ldlt().solve(A.transpose() * y);
}

// Dense hat matrix A (A^T A + alpha I)^{-1} A^T.
inline Eigen::MatrixXd dense_hat(const Eigen::MatrixXd& A, double alpha) {
  Eigen::MatrixXd M = A.transpose() * A;
  M.diagonal().array() += alpha;
  return A * M.ldlt().solve(A.transpose());
}

// Exhaustive LASSO oracle for small n: for every sign pattern s in {-1,0,1}^n
// solve the stationarity system on the support and keep sign-consistent
// candidates; the global minimizer is among them.
inline Eigen::VectorXd lasso_enumerate(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double alpha,
                                       double* best_obj = nullptr) {
  const int n = static_cast<int>(A.cols());
  int total = 1;
  for (int j = 0; j < n; ++j) total *= 3;
  auto obj = [&](const Eigen::VectorXd& z) { return 0.5 * (A * z - y).squaredNorm() + alpha * z.lpNorm<1>(); };
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double bo = obj(best);
  std::vector<int> s(n);
  for (int code = 1; code < total; ++code) {
    int c = code;
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      s[j] = c % 3 - 1;
      c /= 3;
      if (s[j] != 0) idx.push_back(j);
    }
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd AI(A.rows(), k);
    Eigen::VectorXd sI(k);
    for (int a = 0; a < k; ++a) {
      AI.col(a) = A.col(idx[a]);
      sI[a] = s[idx[a]];
    }
    const Eigen::VectorXd zI = (AI.transpose() * AI).ldlt().solve(AI.transpose() * y - alpha * sI);
    bool ok = true;
    for (int a = 0; a < k && ok; ++a) ok = zI[a] * sI[a] > 0.0;
    if (!ok) continue;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < k; ++a) z[idx[a]] = zI[a];
    const double o = obj(z);
    if (o < bo) {
      bo = o;
      best = z;
    }
  }
  if (best_obj) *best_obj = bo;
  return best;
}

// Largest violation of the LASSO optimality conditions at z.
inline double kkt_violation(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                            double alpha) {
  const Eigen::VectorXd g = A.transpose() * (A * z - y);
  double v = 0.0;
  for (int j = 0; j < z.size(); ++j) {
    if (z[j] != 0.0)
      v = std::max(v, std::abs(g[j] + alpha * (z[j] > 0 ? 1.0 : -1.0)));
    else
      v = std::max(v, std::abs(g[j]) - alpha);
  }
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
