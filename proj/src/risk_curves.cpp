#include "riskest/risk_curves.hpp"

#include <cmath>

#include "riskest/l2_rules.hpp"
#include "riskest/numeric.hpp"

namespace riskest {

namespace {

// 1/alpha with 1/inf = 0, so that t = 1/(1 + g^2/alpha) covers the infinity point.
std::vector<double> inverse_alphas(const AlphaGrid& grid) {
  std::vector<double> inv(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) inv[static_cast<std::size_t>(k)] = 1.0 / grid[k];
  return inv;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, double scale_a,
                    double scale_b) {
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) best = std::max(best, std::abs(scale_a * a[k] - scale_b * b[k]));
  return best;
}

}  // namespace

RiskCurves::RiskCurves(const SpectralDecomposition& dec, const AlphaGrid& grid, double sigma)
    : dec_(dec), grid_(grid), sigma_(sigma) {
  require(sigma >= 0.0 && std::isfinite(sigma), "RiskCurves: sigma must be finite and >= 0");
  const auto& a = grid_.values();
  df_ = accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g2 = dec_.gammas[i] * dec_.gammas[i];
    return g2 / (g2 + a[k]);
  });
  gdf_ = accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g2 = dec_.gammas[i] * dec_.gammas[i];
    return 1.0 / (g2 + a[k]);
  });
}

template <class Weight>
std::vector<double> RiskCurves::accumulate(int count, Weight&& weight) const {
  const std::size_t nk = static_cast<std::size_t>(grid_.size());
  std::vector<double> sum(nk, 0.0), carry(nk, 0.0);
  for (int i = 0; i < count; ++i) {
    double* s = sum.data();
    double* c = carry.data();
    for (std::size_t k = 0; k < nk; ++k) {
      const double v = weight(i, k);
      const double t = s[k] + v;
      c[k] += std::abs(s[k]) >= std::abs(v) ? (s[k] - t) + v : (v - t) + s[k];
      s[k] = t;
    }
  }
  for (std::size_t k = 0; k < nk; ++k) sum[k] += carry[k];
  return sum;
}

std::vector<double> RiskCurves::residual_weighted(const Eigen::VectorXd& v) const {
  require(v.size() == dec_.m(), "residual_weighted: vector has wrong dimension");
  const auto inv = inverse_alphas(grid_);
  std::vector<double> out = accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g2 = dec_.gammas[i] * dec_.gammas[i];
    const double t = 1.0 / (1.0 + g2 * inv[k]);
    return t * t * v[i];
  });
  // Components outside the effective range pass through unfiltered.
  CompensatedSum tail;
  for (int i = dec_.rank; i < dec_.m(); ++i) tail.add(v[i]);
  for (double& o : out) o += tail.value();
  return out;
}

std::vector<double> RiskCurves::sure_weighted(const Eigen::VectorXd& v) const {
  require(v.size() >= dec_.rank, "sure_weighted: vector has wrong dimension");
  const auto inv = inverse_alphas(grid_);
  return accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g = dec_.gammas[i];
    const double w = 1.0 / ((1.0 + g * g * inv[k]) * g);
    return w * w * v[i];
  });
}

std::vector<double> RiskCurves::dp(const SpectralCoords& c) const {
  auto out = residual_weighted(c.y.cwiseAbs2());
  const double shift = dec_.m() * sigma_ * sigma_;
  for (double& o : out) o -= shift;
  return out;
}

std::vector<double> RiskCurves::psure(const SpectralCoords& c) const {
  auto out = dp(c);
  const double s2 = sigma_ * sigma_;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += 2.0 * s2 * df_[k];
  return out;
}

std::vector<double> RiskCurves::gsure(const SpectralCoords& c) const {
  if (dec_.rank > 0) {
    const double g = dec_.gammas[dec_.rank - 1];
    if (!std::isfinite(1.0 / (g * g * g * g))) {
      throw NumericError("gsure: smallest retained singular value underflows (cond(A) = " +
                         std::to_string(dec_.cond) + ")");
    }
  }
  const double s2 = sigma_ * sigma_;
  // Fold -sigma^2/gamma^2 into each component so the large terms cancel per i.
  const auto inv = inverse_alphas(grid_);
  const auto& a = grid_.values();
  return accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g = dec_.gammas[i];
    const double g2 = g * g;
    const double w = 1.0 / ((1.0 + g2 * inv[k]) * g);
    return w * w * c.y[i] * c.y[i] - s2 / g2 + 2.0 * s2 / (g2 + a[k]);
  });
}

std::vector<double> RiskCurves::edp(const SpectralCoords& c) const {
  Eigen::VectorXd ey2(dec_.m());
  for (int i = 0; i < dec_.m(); ++i) {
    const double g = dec_.effective_gamma(i);
    const double xs = i < c.x_star.size() ? c.x_star[i] : 0.0;
    ey2[i] = g * g * xs * xs + sigma_ * sigma_;
  }
  auto out = residual_weighted(ey2);
  const double shift = dec_.m() * sigma_ * sigma_;
  for (double& o : out) o -= shift;
  return out;
}

std::vector<double> RiskCurves::mspe(const SpectralCoords& c) const {
  auto out = edp(c);
  const double s2 = sigma_ * sigma_;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += 2.0 * s2 * df_[k];
  return out;
}

std::vector<double> RiskCurves::msee(const SpectralCoords& c) const {
  const auto inv = inverse_alphas(grid_);
  const auto& a = grid_.values();
  const double s2 = sigma_ * sigma_;
  return accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g = dec_.gammas[i];
    const double t = 1.0 / (1.0 + g * g * inv[k]);
    const double f = g / (g * g + a[k]);
    return t * t * c.x_star[i] * c.x_star[i] + f * f * s2;
  });
}

std::vector<double> RiskCurves::estimation_error_sq(const SpectralCoords& c) const {
  auto out = projected_error_sq(c);
  CompensatedSum tail;
  for (int i = dec_.rank; i < dec_.n(); ++i) tail.add(c.x_star[i] * c.x_star[i]);
  for (double& o : out) o += tail.value();
  return out;
}

std::vector<double> RiskCurves::projected_error_sq(const SpectralCoords& c) const {
  const auto inv = inverse_alphas(grid_);
  const auto& a = grid_.values();
  return accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g = dec_.gammas[i];
    const double t = 1.0 / (1.0 + g * g * inv[k]);
    const double e = g / (g * g + a[k]) * c.eps[i] - t * c.x_star[i];
    return e * e;
  });
}

std::vector<double> RiskCurves::prediction_error_sq(const SpectralCoords& c) const {
  const auto inv = inverse_alphas(grid_);
  const auto& a = grid_.values();
  return accumulate(dec_.rank, [&](int i, std::size_t k) {
    const double g = dec_.gammas[i];
    const double t = 1.0 / (1.0 + g * g * inv[k]);
    const double e = g * (g / (g * g + a[k]) * c.eps[i] - t * c.x_star[i]);
    return e * e;
  });
}

Eigen::VectorXd RiskCurves::centered_y_sq(const SpectralCoords& c) const {
  const double s2 = sigma_ * sigma_;
  Eigen::VectorXd d(dec_.m());
  for (int i = 0; i < dec_.m(); ++i) {
    if (i < dec_.rank) {
      // y^2 - (g^2 x*^2 + s^2) with y = g x* + e, without forming y^2.
      const double gx = dec_.gammas[i] * c.x_star[i];
      d[i] = c.eps[i] * c.eps[i] - s2 + 2.0 * gx * c.eps[i];
    } else {
      d[i] = c.y[i] * c.y[i] - s2;
    }
  }
  return d;
}

RiskCurves::SupDeviation RiskCurves::sup_deviation(const SpectralCoords& c) const {
  const Eigen::VectorXd d = centered_y_sq(c);
  SupDeviation out;
  for (double v : residual_weighted(d)) out.psure = std::max(out.psure, std::abs(v));
  for (double v : sure_weighted(d)) out.gsure = std::max(out.gsure, std::abs(v));
  return out;
}

RiskCurves::SupLoss RiskCurves::sup_loss_deviation(const SpectralCoords& c) const {
  const double m = dec_.m();
  const double c_m = loss_scaling(dec_).c_m;
  SupLoss out;
  out.psure = max_abs_diff(psure(c), prediction_error_sq(c), 1.0 / m, 1.0 / m);
  out.gsure = max_abs_diff(gsure(c), projected_error_sq(c), c_m, c_m);
  return out;
}

}  // namespace riskest
