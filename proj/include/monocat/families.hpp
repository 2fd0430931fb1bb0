#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "monocat/common.hpp"

namespace monocat {

/// Descriptor for an analytic or tabulated distribution-like function on a support.
///
/// Kinds (t = (x - lo) / (hi - lo)):
///   uniform                      t
///   power            k           t^k
///   reflected_power  k           1 - (1 - t)^k
///   exponential      beta        (1 - e^{-beta t}) / (1 - e^{-beta})
///   logistic         mu, s       logistic cdf in x, renormalized to the support
///   reverse_logistic eps, skew   logit(eps + (1 - 2 eps) t^skew), renormalized
///   uniform_interval lo, hi      uniform cdf on a sub-interval (flat outside)
///   sine_wave        amp, cycles density 1 + amp sin(2 pi cycles t)
///   table                        piecewise-linear through (x, value) rows
///   mixture                      weighted sum of component families, normalized
struct FamilySpec {
  std::string kind = "uniform";
  std::map<std::string, double> params;
  std::vector<std::pair<double, double>> table;
  std::vector<std::pair<double, FamilySpec>> components;

  double param(const std::string& name, double fallback) const;
  double required(const std::string& name) const;

  static FamilySpec uniform() { return {}; }
  static FamilySpec power(double k);
  static FamilySpec reflected_power(double k);
  static FamilySpec exponential(double beta);
  static FamilySpec logistic(double mu, double s);
  static FamilySpec reverse_logistic(double eps, double skew = 1.0);
  static FamilySpec uniform_interval(double lo, double hi);
  static FamilySpec sine_wave(double amp, double cycles);
  static FamilySpec from_table(std::vector<std::pair<double, double>> rows);
  static FamilySpec mixture(std::vector<std::pair<double, FamilySpec>> parts);
};

/// Knots of a family sampled on a support. Values are raw (not yet normalized).
struct SampledFamily {
  std::vector<double> xs;
  std::vector<double> ys;
  bool smooth_positive_density = false;
};

/// Samples the family exactly at a uniform grid of n knots plus any interior
/// breakpoints the family has. Tables are taken verbatim.
SampledFamily sample_family(const FamilySpec& spec, const QualitySupport& support, int n);

/// A real function of quality used as a weight, fee, or effort cost.
class ScalarFunction {
 public:
  enum class Kind { poly, inverse, exp };

  ScalarFunction() = default;

  /// sum_i c_i x^i
  static ScalarFunction poly(std::vector<double> coeffs);
  /// scale / (x + shift)
  static ScalarFunction inverse(double scale, double shift = 0.0);
  /// scale * exp(rate * x)
  static ScalarFunction exp(double scale, double rate);
  static ScalarFunction constant(double c) { return poly({c}); }

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  Kind kind_ = Kind::poly;
  std::vector<double> coeffs_{1.0};
};

}  // namespace monocat
