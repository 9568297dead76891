#include "riskest/problem.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "riskest/numeric.hpp"

namespace riskest {

namespace {

// Spike amplitudes and (irrational) positions; b_i - 1/2 approximates
// -0.3, -0.2, 0.1, 0.3.
constexpr std::array<double, 4> kSpikeAmplitudes = {0.5, 1.0, 0.8, 0.5};

std::array<double, 4> spike_positions() {
  return {1.0 / std::sqrt(26.0), 1.0 / std::sqrt(11.0), 1.0 / std::sqrt(3.0),
          1.0 / std::sqrt(1.5)};
}

double bump(double t, double l) {
  const double r = t / l;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

double wrap_unit_period(double t) { return t - std::round(t); }

std::vector<double> trapezoid_weights(int nodes) {
  std::vector<double> w(static_cast<std::size_t>(nodes), 1.0);
  w.front() = 0.5;
  w.back() = 0.5;
  return w;
}

// Trapezoid approximation of the double integral of k(s - t) over
// [s0, s0 + 1/m] x [t0, t0 + 1/n], expressed through the offset s0 - t0.
double cell_integral(double offset, double hs, double ht, const std::vector<double>& w,
                     const KernelSpec& kernel) {
  const int nodes = static_cast<int>(w.size());
  CompensatedSum acc;
  for (int p = 0; p < nodes; ++p) {
    double row = 0.0;
    for (int q = 0; q < nodes; ++q) {
      row += w[q] * kernel_eval(offset + p * hs - q * ht, kernel);
    }
    acc.add(w[p] * row);
  }
  return acc.value() * hs * ht;
}

// True when the kernel vanishes on the whole cell pair.
bool cells_disjoint_from_support(double offset, double width_s, double width_t, double l) {
  // offset is s0 - t0; the cell-pair differences cover [offset - width_t, offset + width_s].
  const double center = wrap_unit_period(offset + 0.5 * (width_s - width_t));
  const double half = 0.5 * (width_s + width_t);
  return std::abs(center) - half >= l;
}

}  // namespace

double kernel_norm(double l, int quad_nodes) {
  require(l > 0.0 && l <= 0.5, "kernel_norm: kernel width l must lie in (0, 1/2]");
  require(quad_nodes >= 2, "kernel_norm: need at least 2 quadrature nodes");
  const double h = 2.0 * l / (quad_nodes - 1);
  CompensatedSum acc;
  // Endpoints contribute exactly zero.
  for (int k = 1; k + 1 < quad_nodes; ++k) acc.add(bump(-l + k * h, l));
  return acc.value() * h;
}

KernelSpec KernelSpec::make(double l, int norm_nodes) {
  return KernelSpec{l, kernel_norm(l, norm_nodes)};
}

double kernel_eval(double t, const KernelSpec& spec) {
  return bump(wrap_unit_period(t), spec.l) / spec.norm_const;
}

Eigen::MatrixXd build_forward_matrix(int m, int n, double l, const QuadratureSettings& quad) {
  require(m >= 1 && n >= 1, "build_forward_matrix: m and n must be positive");
  require(l > 0.0 && l <= 0.5, "build_forward_matrix: kernel width l must lie in (0, 1/2]");
  require(quad.cell_nodes >= 2, "build_forward_matrix: need at least 2 nodes per cell axis");

  const KernelSpec kernel = KernelSpec::make(l, quad.norm_nodes);
  const auto w = trapezoid_weights(quad.cell_nodes);
  const double width_s = 1.0 / m;
  const double width_t = 1.0 / n;
  const double hs = width_s / (quad.cell_nodes - 1);
  const double ht = width_t / (quad.cell_nodes - 1);
  const double scale = std::sqrt(static_cast<double>(m) * n);

  auto entry = [&](double offset) {
    if (cells_disjoint_from_support(offset, width_s, width_t, l)) return 0.0;
    return scale * cell_integral(offset, hs, ht, w, kernel);
  };

  Eigen::MatrixXd A(m, n);
  if (m == n) {
    // Equal partitions: the periodic kernel makes A circulant.
    std::vector<double> by_shift(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) by_shift[d] = entry(-static_cast<double>(d) / n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = by_shift[((j - i) % n + n) % n];
    return A;
  }

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      A(i, j) = entry(static_cast<double>(i) / m - static_cast<double>(j) / n);
    }
  }
  return A;
}

int spike_cell(int n, double b) {
  // b - 1/2 in E_j = [(j-1)/n - 1/2, j/n - 1/2]  <=>  j - 1 <= n b <= j.
  return static_cast<int>(std::floor(n * b));
}

Eigen::VectorXd build_true_solution(int n) {
  require(n >= 8, "build_true_solution: need n >= 8 so the spikes occupy distinct cells");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const auto b = spike_positions();
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < b.size(); ++k) x[spike_cell(n, b[k])] += scale * kSpikeAmplitudes[k];
  return x;
}

ProblemInstance ProblemInstance::build(int m, int n, double l, double sigma,
                                       const QuadratureSettings& quad) {
  require(sigma >= 0.0 && std::isfinite(sigma), "ProblemInstance: sigma must be finite and >= 0");
  ProblemInstance p;
  p.A = build_forward_matrix(m, n, l, quad);
  p.x_star = build_true_solution(n);
  p.sigma = sigma;
  p.m = m;
  p.n = n;
  p.l = l;
  p.quad = quad;
  return p;
}

}  // namespace riskest
