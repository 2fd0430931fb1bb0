#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monocat/solver.hpp"

namespace monocat {

/// Outcome of a grid dominance test. `margin` is the worst slack found (negative on failure).
struct Check {
  bool ok = false;
  double margin = 0.0;
};

/// S(x) - S(lo) >= [1 - S(lo)] R(x) on the percentile grid.
Check check_full_pooling(const SenderWeighting& s, const ReceiverCdf& r, int m = kDefaultGrid,
                         double tol = kTolEnv);
/// H has nonnegative second differences on the percentile grid.
Check check_full_separation(const SenderWeighting& s, const ReceiverCdf& r, int m = kDefaultGrid,
                            double tol = kTolEnv);

/// Chord test on [a, b]: (S(x) - S(a)) / (R(x) - R(a)) >= (S(b) - S(a)) / (R(b) - R(a)).
/// Sampled on a uniform percentile grid over [R(a), R(b)] with the global spacing of m.
Check check_fosd_on(const SenderWeighting& s, const ReceiverCdf& r, double a, double b, int m = kDefaultGrid,
                    double tol = kTolEnv);
/// Local convexity of H on [R(a), R(b)].
Check check_lr_on(const SenderWeighting& s, const ReceiverCdf& r, double a, double b, int m = kDefaultGrid,
                  double tol = kTolEnv);

struct FlipReport {
  double coverage = 0.0;  // fraction of the support pooled in either problem
  double overlap = 0.0;   // fraction pooled in both
  bool degenerate = false;
  Categorization original;
  Categorization flipped;
  bool flipped_full_pooling = false;
};

/// Solves the original and the flipped problem. Throws FlipUndefined when S cannot serve as a cdf.
/// On a globally affine H the coverage is reported as 1 and `degenerate` is set.
FlipReport flip_report(const SenderWeighting& s, const ReceiverCdf& r, int m = kDefaultGrid);

/// Between consecutive pools there is at least one separated grid cell. nullopt unless both
/// priors carry smooth positive densities.
std::optional<bool> check_alternation(const SenderWeighting& s, const ReceiverCdf& r, const Categorization& a,
                                      int m = kDefaultGrid);

struct IntervalResult {
  double a = 0.0;
  double b = 0.0;
  Check fosd;
  Check lr;
};

struct DiagnosticsReport {
  Check full_pooling;
  Check full_separation;
  Check fosd_global;
  Check lr_global;
  bool degenerate_affine = false;
  std::vector<Pool> affine_stretches;  // separated quality ranges where H is affine
  std::vector<IntervalResult> intervals;
  std::optional<FlipReport> flip;
  std::string flip_error;
  std::optional<bool> alternation;
};

DiagnosticsReport diagnose(const SenderWeighting& s, const ReceiverCdf& r, const Solution& sol,
                           const std::vector<std::pair<double, double>>& intervals = {}, int m = kDefaultGrid);

}  // namespace monocat
