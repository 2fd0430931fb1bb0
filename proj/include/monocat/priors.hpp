#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "monocat/common.hpp"
#include "monocat/families.hpp"

namespace monocat {

using QualityFn = std::function<double(double)>;

/// Continuous, strictly increasing, piecewise-linear cdf R on the support.
class ReceiverCdf {
 public:
  /// Knots must start at (lo, 0), end at (hi, 1) and increase by at least
  /// kSlopeFloor in probability between neighbours.
  static ReceiverCdf from_knots(const QualitySupport& support, std::vector<double> xs,
                                std::vector<double> ps, bool smooth_positive_density = false);

  double operator()(double x) const;
  double inverse(double z) const;
  /// Integral of y dR(y) over [a, b]; exact for the piecewise-linear cdf.
  double first_moment(double a, double b) const;
  /// Conditional mean of quality on [a, b) under R.
  double conditional_mean(double a, double b) const;
  double mean() const { return moments_.back(); }

  const QualitySupport& support() const { return support_; }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ps() const { return ps_; }
  bool smooth_positive_density() const { return smooth_; }

 private:
  double moment_to(double x) const;

  QualitySupport support_;
  std::vector<double> xs_;
  std::vector<double> ps_;
  std::vector<double> moments_;  // prefix of first moments at knots
  bool smooth_ = false;
};

/// Discretized signed measure dS: per-cell masses plus an atom at the lower endpoint.
struct SignedGridMeasure {
  std::vector<double> grid;
  std::vector<double> cell_masses;
  double atom_at_lo = 0.0;

  double total() const;
};

/// Left-continuous bounded-variation weighting S with S(hi) = 1 and an optional
/// upward jump at lo. Not required to be monotone.
class SenderWeighting {
 public:
  /// `values` are the right-limits at each knot: values[0] = lim_{a -> lo+} S(a).
  static SenderWeighting from_knots(const QualitySupport& support, std::vector<double> xs,
                                    std::vector<double> values, double value_at_lo,
                                    bool smooth_positive_density = false);
  static SenderWeighting from_measure(const QualitySupport& support, const SignedGridMeasure& m,
                                      double value_at_lo, bool smooth_positive_density = false);
  static SenderWeighting from_receiver(const ReceiverCdf& r);

  /// S(x) with S(lo) = value_at_lo (left endpoint, below any jump).
  double operator()(double x) const;
  double value_at_lo() const { return value_at_lo_; }
  double right_limit_at_lo() const { return values_.front(); }
  double jump_at_lo() const { return values_.front() - value_at_lo_; }

  SignedGridMeasure measure() const;
  /// Nondecreasing, continuous, S(lo) = 0.
  bool is_cdf() const;

  const QualitySupport& support() const { return support_; }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> values() const { return values_; }
  bool smooth_positive_density() const { return smooth_; }

 private:
  QualitySupport support_;
  std::vector<double> xs_;
  std::vector<double> values_;
  double value_at_lo_ = 0.0;
  bool smooth_ = false;
};

ReceiverCdf build_receiver(const FamilySpec& family, const QualitySupport& support,
                           int n = kDefaultKnots);

/// With `normalize`, values are divided by S(hi); otherwise S(hi) must already be 1.
SenderWeighting build_sender(const FamilySpec& family, const QualitySupport& support,
                             int n = kDefaultKnots, bool normalize = true);

/// dS'(a) = alpha(a) dS(a), renormalized so that S'(hi) = 1.
SenderWeighting transform_state_dependent(const SenderWeighting& s, const QualityFn& alpha);
/// dS(v) = pi(v) dR(v).
SenderWeighting transform_retail(const ReceiverCdf& r, const QualityFn& pi);
/// dS(a) = lambda2(a) dR(a).
SenderWeighting transform_peer_effects(const ReceiverCdf& r, const QualityFn& lambda2);
/// dS(x) = [lambda1(x) + lambda2 x] dR(x).
SenderWeighting transform_quadratic(const ReceiverCdf& r, const QualityFn& lambda1, double lambda2);

struct GroupPrior {
  double weight = 1.0;
  SenderWeighting cdf;
};

/// S = sum w_G F_G and R = sum F_G, each normalized to 1 at hi.
std::pair<SenderWeighting, ReceiverCdf> transform_group_mixture(std::span<const GroupPrior> groups);

/// Sorted union of two knot lists with near-duplicates collapsed; knots from `b` are kept exactly.
std::vector<double> merge_knots(std::span<const double> a, std::span<const double> b, double width);

}  // namespace monocat
