#pragma once

#include <Eigen/Dense>

namespace riskest {

/// Quadrature settings for the periodic-convolution test problem.
struct QuadratureSettings {
  /// Trapezoid nodes per axis per cell pair (endpoints included).
  int cell_nodes = 100;
  /// Trapezoid nodes used for the kernel normalization integral.
  int norm_nodes = 100000;

  bool operator==(const QuadratureSettings&) const = default;
};

/// Compactly supported C-infinity bump of half-width l, normalized to unit mass
/// and continued 1-periodically.
struct KernelSpec {
  double l = 0.0;
  double norm_const = 0.0;

  /// Computes the normalization once for the given width.
  static KernelSpec make(double l, int norm_nodes = QuadratureSettings{}.norm_nodes);
};

/// Trapezoidal approximation of the integral of exp(-1/(1 - t^2/l^2)) over (-l, l).
double kernel_norm(double l, int quad_nodes);

/// Periodic kernel value k_l(t); total function.
double kernel_eval(double t, const KernelSpec& spec);

/// A_ij = sqrt(mn) * double integral of k_l(s - t) over E_i^m x E_j^n, by the 2-D
/// trapezoidal rule with `quad.cell_nodes` nodes per axis.
Eigen::MatrixXd build_forward_matrix(int m, int n, double l, const QuadratureSettings& quad = {});

/// Coefficients of the four-spike solution in the orthonormal piecewise-constant basis.
Eigen::VectorXd build_true_solution(int n);

/// Zero-based cell index containing the point b - 1/2 for a partition of [-1/2, 1/2] into n cells.
int spike_cell(int n, double b);

struct ProblemInstance {
  Eigen::MatrixXd A;
  Eigen::VectorXd x_star;
  double sigma = 0.1;
  int m = 0;
  int n = 0;
  double l = 0.0;
  QuadratureSettings quad;

  static ProblemInstance build(int m, int n, double l, double sigma,
                               const QuadratureSettings& quad = {});

  Eigen::VectorXd clean_data() const { return A * x_star; }
};

}  // namespace riskest
