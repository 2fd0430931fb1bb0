#pragma once

#include <stdexcept>
#include <string>

namespace monocat {

/// Absolute tolerance for envelope-vs-H classification and dominance tests.
inline constexpr double kTolEnv = 1e-9;
/// Agreement tolerance between value routes.
inline constexpr double kTolVal = 1e-6;
/// Incentive-compatibility violation tolerance.
inline constexpr double kTolIc = 1e-6;
/// Minimum probability increment between consecutive receiver-cdf knots.
inline constexpr double kSlopeFloor = 1e-12;
/// Largest grid accepted by the brute-force partition oracle.
inline constexpr int kMaxOracleCells = 800;
/// Default number of knots used when sampling analytic families.
inline constexpr int kDefaultKnots = 1001;
/// Default number of points on the percentile grid.
inline constexpr int kDefaultGrid = 2001;

/// Bad input: malformed family parameters, tables, intervals, configs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerically degenerate instance (Condition C breach, vanishing mass, undefined flip).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QualitySupport {
  double lo = 0.0;
  double hi = 1.0;

  /// Throws InvalidInput unless lo < hi and both are finite.
  static QualitySupport make(double lo, double hi);

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const QualitySupport&) const = default;
};

}  // namespace monocat
