#pragma once

#include <vector>

#include <Eigen/Dense>

#include "riskest/alpha_grid.hpp"
#include "riskest/spectral.hpp"

namespace riskest {

/// Evaluates the spectral risk quantities on a whole alpha grid at once.
///
/// Every curve is a sum over components i of a weight depending on (gamma_i,
/// alpha) times a per-draw value; the loop runs over i outside and over the
/// grid inside with one compensated accumulator per grid point.
class RiskCurves {
 public:
  RiskCurves(const SpectralDecomposition& dec, const AlphaGrid& grid, double sigma);

  const AlphaGrid& grid() const { return grid_; }
  double sigma() const { return sigma_; }

  /// sum_{i<m} t_i(alpha)^2 v_i, t = alpha/(gamma^2+alpha), t = 1 past the rank.
  std::vector<double> residual_weighted(const Eigen::VectorXd& v) const;
  /// sum_{i<r} (t_i(alpha)/gamma_i)^2 v_i.
  std::vector<double> sure_weighted(const Eigen::VectorXd& v) const;

  std::vector<double> dp(const SpectralCoords& c) const;
  std::vector<double> psure(const SpectralCoords& c) const;
  std::vector<double> gsure(const SpectralCoords& c) const;

  // Expectations; only c.x_star is read.
  std::vector<double> edp(const SpectralCoords& c) const;
  std::vector<double> mspe(const SpectralCoords& c) const;
  std::vector<double> msee(const SpectralCoords& c) const;

  /// ||x_alpha - x*||^2 on the grid.
  std::vector<double> estimation_error_sq(const SpectralCoords& c) const;
  /// ||A(x_alpha - x*)||^2 on the grid.
  std::vector<double> prediction_error_sq(const SpectralCoords& c) const;
  /// ||Pi(x_alpha - x*)||^2 on the grid.
  std::vector<double> projected_error_sq(const SpectralCoords& c) const;

  /// y_i^2 - E[y_i^2] for i < m.
  Eigen::VectorXd centered_y_sq(const SpectralCoords& c) const;

  struct SupDeviation {
    double psure = 0.0;  // sup_alpha |PSURE - MSPE|
    double gsure = 0.0;  // sup_alpha |GSURE - MSEE|
  };
  /// Grid sup of the estimator deviations; uses PSURE - MSPE = sum t^2 (y^2 - E y^2)
  /// and GSURE - MSEE = sum (t/gamma)^2 (y^2 - E y^2).
  SupDeviation sup_deviation(const SpectralCoords& c) const;

  struct SupLoss {
    double psure = 0.0;  // sup_alpha |(1/m) PSURE - L|
    double gsure = 0.0;  // sup_alpha |c_m GSURE - L~|
  };
  SupLoss sup_loss_deviation(const SpectralCoords& c) const;

  const std::vector<double>& df() const { return df_; }
  const std::vector<double>& gdf() const { return gdf_; }

 private:
  template <class Weight>
  std::vector<double> accumulate(int count, Weight&& weight) const;

  const SpectralDecomposition& dec_;
  AlphaGrid grid_;
  double sigma_;
  std::vector<double> df_;
  std::vector<double> gdf_;
};

}  // namespace riskest
