#include "riskest/alpha_grid.hpp"

#include <cmath>
#include <limits>

#include "riskest/numeric.hpp"

namespace riskest {

namespace {

void check_values(const std::vector<double>& v) {
  require(!v.empty(), "AlphaGrid: grid is empty");
  for (std::size_t k = 0; k < v.size(); ++k) {
    require(v[k] > 0.0 && !std::isnan(v[k]), "AlphaGrid: values must be positive");
    if (std::isinf(v[k])) require(k + 1 == v.size(), "AlphaGrid: infinity must be the last point");
    if (k > 0) require(v[k] > v[k - 1], "AlphaGrid: values must be strictly increasing");
  }
}

}  // namespace

AlphaGrid AlphaGrid::logarithmic(double log10_min, double log10_max, double step,
                                 bool include_infinity) {
  require(std::isfinite(log10_min) && std::isfinite(log10_max), "AlphaGrid: bounds must be finite");
  require(step > 0.0, "AlphaGrid: step must be positive");
  require(log10_max >= log10_min, "AlphaGrid: log10_max < log10_min");
  const double span = (log10_max - log10_min) / step;
  const long count = std::lround(span) + 1;
  require(std::abs(span - std::round(span)) < 1e-6, "AlphaGrid: step does not divide the range");
  require(count <= 10'000'000, "AlphaGrid: grid too large");

  AlphaGrid g;
  g.kind_ = Kind::Logarithmic;
  g.log10_min_ = log10_min;
  g.log10_max_ = log10_max;
  g.step_ = step;
  g.values_.reserve(static_cast<std::size_t>(count) + 1);
  // Index-based exponent avoids drift from repeated addition.
  for (long k = 0; k < count; ++k) g.values_.push_back(std::pow(10.0, log10_min + k * step));
  if (include_infinity) {
    g.values_.push_back(std::numeric_limits<double>::infinity());
    g.includes_infinity_ = true;
  }
  check_values(g.values_);
  return g;
}

AlphaGrid AlphaGrid::linear(double delta, int count) {
  require(delta > 0.0 && std::isfinite(delta), "AlphaGrid: linear spacing must be positive");
  require(count >= 1, "AlphaGrid: linear grid needs at least one point");
  AlphaGrid g;
  g.kind_ = Kind::Linear;
  g.step_ = delta;
  for (int k = 1; k <= count; ++k) g.values_.push_back(k * delta);
  g.log10_min_ = std::log10(g.values_.front());
  g.log10_max_ = std::log10(g.values_.back());
  return g;
}

AlphaGrid AlphaGrid::from_values(std::vector<double> values) {
  check_values(values);
  AlphaGrid g;
  g.kind_ = Kind::Explicit;
  g.includes_infinity_ = std::isinf(values.back());
  g.values_ = std::move(values);
  g.log10_min_ = std::log10(g.values_.front());
  g.log10_max_ = std::log10(g.values_[static_cast<std::size_t>(g.finite_size() > 0 ? g.finite_size() - 1 : 0)]);
  return g;
}

AlphaGrid AlphaGrid::finite_part() const {
  AlphaGrid g = *this;
  if (g.includes_infinity_) {
    g.values_.pop_back();
    g.includes_infinity_ = false;
  }
  require(!g.values_.empty(), "AlphaGrid: no finite points");
  return g;
}

}  // namespace riskest
