#pragma once

#include <vector>

namespace riskest {

/// Sorted candidate regularization parameters, optionally ending in +inf.
class AlphaGrid {
 public:
  enum class Kind { Logarithmic, Linear, Explicit };

  /// 10^(log10_min + k*step) for k = 0 .. round((log10_max - log10_min)/step).
  static AlphaGrid logarithmic(double log10_min, double log10_max, double step,
                               bool include_infinity);
  /// delta, 2 delta, ..., count * delta.
  static AlphaGrid linear(double delta, int count);
  /// Arbitrary strictly increasing positive values (the last may be +inf).
  static AlphaGrid from_values(std::vector<double> values);

  /// Paper defaults: log10 alpha from -40 to 40 in steps of 0.01, plus infinity.
  static AlphaGrid quadratic_default() { return logarithmic(-40.0, 40.0, 0.01, true); }
  /// LASSO default: log10 alpha from -10 to 10 in steps of 0.01.
  static AlphaGrid lasso_default() { return logarithmic(-10.0, 10.0, 0.01, false); }

  const std::vector<double>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int k) const { return values_[static_cast<std::size_t>(k)]; }
  bool includes_infinity() const { return includes_infinity_; }
  /// Number of finite points.
  int finite_size() const { return size() - (includes_infinity_ ? 1 : 0); }

  Kind kind() const { return kind_; }
  double log10_min() const { return log10_min_; }
  double log10_max() const { return log10_max_; }
  double step() const { return step_; }

  /// Copy without the infinity point.
  AlphaGrid finite_part() const;

 private:
  std::vector<double> values_;
  bool includes_infinity_ = false;
  Kind kind_ = Kind::Explicit;
  double log10_min_ = 0.0;
  double log10_max_ = 0.0;
  double step_ = 0.0;
};

}  // namespace riskest
