#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "monocat/analysis.hpp"
#include "monocat/valuation.hpp"

namespace monocat {

/// Grading problem primitives. F0 is the lowest-belief prior of ability (a continuous cdf
/// with F0(lo) = 0), R the market prior, c the per-unit effort cost, lambda the market
/// value of learning and sigma the share of effort cost internalized ex ante.
struct SchoolingConfig {
  SenderWeighting f0;
  ReceiverCdf r;
  ScalarFunction cost;
  double lambda = 0.0;
  double sigma = 0.0;
  int knots = kDefaultKnots;

  const QualitySupport& support() const { return r.support(); }
  /// Throws InvalidInput on bad ranges and NumericFailure when Condition C fails
  /// (c(hi) <= lambda or c not strictly decreasing on the grid).
  void validate() const;
};

struct InducedSender {
  SenderWeighting s;
  double k = 0.0;
  /// lambda > sigma * int c dF0: learning is valued for itself and S(lo) may be negative.
  bool intrinsic = false;
};

InducedSender induce_sender(const SchoolingConfig& cfg);

/// int_a^hi (sigma c - lambda) dF0 on the schooling grid.
struct SuffixIntegral {
  std::vector<double> xs;
  std::vector<double> values;
};
SuffixIntegral learning_surplus(const SchoolingConfig& cfg);

/// Piecewise learning schedule. `left[i]` and `right[i]` are the limits at xs[i]; the two
/// differ only at thresholds where the posterior mean jumps.
class LearningFunction {
 public:
  LearningFunction(std::vector<double> xs, std::vector<double> left, std::vector<double> right);

  double operator()(double x) const;
  double at_lo() const { return right_.front(); }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> left() const { return left_; }
  std::span<const double> right() const { return right_; }

  struct Jump {
    double at = 0.0;
    double size = 0.0;
  };
  std::vector<Jump> jumps(double tol = 0.0) const;

  /// Adds `delta` to the value at grid point i (both limits). For breakage tests.
  void perturb(std::size_t i, double delta);

 private:
  std::vector<double> xs_;
  std::vector<double> left_;
  std::vector<double> right_;
};

/// l*(A): (A(lo) - lo) / (c(lo) - lambda) when learning is intrinsically valued, else 0.
double initial_learning(const Categorization& a, const SchoolingConfig& cfg);

/// Slope 1 / (c - lambda) on separated stretches, flat on pools, and a jump of
/// (A(t) - A(t-)) / (c(t) - lambda) wherever A jumps. Starts at `start`.
LearningFunction build_learning(const Categorization& a, const SchoolingConfig& cfg, double start);
LearningFunction build_learning(const Categorization& a, const SchoolingConfig& cfg);

/// int [A + (lambda - sigma c) l] dF0.
double school_payoff(const Categorization& a, const LearningFunction& ell, const SchoolingConfig& cfg);

/// Largest gain of mimicking another type or taking the outside option, over `samples`
/// random grid pairs (all grid points are also tried against the outside option).
double verify_ic(const LearningFunction& ell, const Categorization& a, const SchoolingConfig& cfg, int samples,
                 std::uint64_t seed = 1);

struct SchoolSolution {
  InducedSender induced;
  Solution solution;
  LearningFunction learning;
  double payoff = 0.0;        // direct evaluation
  double value_plus_k = 0.0;  // int A dS + K
};

SchoolSolution solve_school(const SchoolingConfig& cfg, int m = kDefaultGrid);

/// int_a^hi (sigma c - lambda) dF0 >= 0 for every grid a, with F0 >= R (F0 is the most
/// pessimistic prior, so the market prior cannot lie below it).
Check check_school_full_pooling(const SchoolingConfig& cfg, double tol = kTolEnv);

std::vector<bool> full_pooling_over_lambda(const SchoolingConfig& cfg, std::span<const double> lambdas);
std::vector<bool> full_pooling_over_sigma(const SchoolingConfig& cfg, std::span<const double> sigmas);
std::vector<bool> full_pooling_over_f0(const SchoolingConfig& cfg, std::span<const SenderWeighting> priors);

/// S(a) = (a^gamma - lambda a) / (1 - lambda a) on [0, 1]: F0 = a^gamma, c = 1/a, sigma = 0,
/// uniform R.
SenderWeighting closed_form_sender(double gamma, double lambda, int n = kDefaultKnots);

struct SweepRow {
  double gamma = 0.0;
  double lambda = 0.0;
  double a_tilde = 1.0;
  bool full_pooling = false;
  double payoff = 0.0;
};

/// One closed-form solve per (gamma, lambda) cell, rows ordered gamma-major.
std::vector<SweepRow> censorship_threshold_sweep(std::span<const double> gammas, std::span<const double> lambdas,
                                                 int m = kDefaultGrid);

namespace reference {
std::vector<SweepRow> censorship_threshold_sweep(std::span<const double> gammas, std::span<const double> lambdas,
                                                 int m = kDefaultGrid);
}

}  // namespace monocat
