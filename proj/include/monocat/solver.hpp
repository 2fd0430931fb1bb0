#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "monocat/priors.hpp"

namespace monocat {

/// Half-open pooling interval [lo, hi).
struct Pool {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x < hi; }
  bool operator==(const Pool&) const = default;
};

/// Monotone categorization: ordered disjoint pools, everything else separated.
/// The upper endpoint of the support is never pooled.
class Categorization {
 public:
  Categorization() = default;
  static Categorization make(const ReceiverCdf& r, std::vector<Pool> pools);
  static Categorization full_pooling(const ReceiverCdf& r);
  static Categorization full_separation(const ReceiverCdf& r);

  const std::vector<Pool>& pools() const { return pools_; }
  /// Images [R(p), R(p')) of the quality pools.
  const std::vector<Pool>& percentile_pools() const { return percentile_pools_; }
  const QualitySupport& support() const { return support_; }

  std::optional<std::size_t> pool_index(double x) const;
  bool is_full_pooling() const;
  bool is_full_separation() const { return pools_.empty(); }
  double pooled_measure() const;

 private:
  QualitySupport support_;
  std::vector<Pool> pools_;
  std::vector<Pool> percentile_pools_;
};

/// H = S o R^{-1} sampled on a uniform percentile grid, with its lower convex envelope.
struct PercentileCurve {
  std::vector<double> z;
  std::vector<double> h;
  std::vector<double> env;                 // empty until the envelope is computed
  std::vector<std::size_t> hull;           // indices of hull vertices
  std::vector<std::uint8_t> pooled;        // per cell [z_k, z_{k+1})
  std::vector<std::pair<std::size_t, std::size_t>> pool_spans;    // [start, end) point indices
  std::vector<std::pair<std::size_t, std::size_t>> affine_spans;  // separated stretches where H is affine
  double tol = kTolEnv;

  std::size_t points() const { return z.size(); }
  std::size_t cells() const { return z.empty() ? 0 : z.size() - 1; }
  bool has_envelope() const { return !env.empty(); }
  bool is_vertex(std::size_t k) const;
  double max_gap() const;
};

/// m percentile points z_k = k / (m - 1); h_0 = S(lo) exactly, h_k = S(R^{-1}(z_k)).
PercentileCurve compose_h(const SenderWeighting& s, const ReceiverCdf& r, int m);

/// Lower hull by a single monotone-chain sweep; also classifies cells as pooled where
/// h - env exceeds `tol` and records the pooling spans.
PercentileCurve lower_convex_envelope(PercentileCurve curve, double tol = kTolEnv);

Categorization extract_categorization(const PercentileCurve& curve, const ReceiverCdf& r);

struct Solution {
  PercentileCurve curve;
  Categorization categorization;
};

Solution solve(const SenderWeighting& s, const ReceiverCdf& r, int m, double tol = kTolEnv);

/// Left edge of the first separated percentile cell mapped to quality; hi under full pooling.
double first_separating_quality(const PercentileCurve& curve, const ReceiverCdf& r);

/// True when H is affine on the whole percentile grid (all categorizations tie).
bool is_globally_affine(const PercentileCurve& curve, double tol = kTolEnv);

class FlipUndefined : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// Swap roles: sender R, receiver S. Requires S to be a continuous strictly increasing cdf.
std::pair<SenderWeighting, ReceiverCdf> flip_problem(const SenderWeighting& s, const ReceiverCdf& r);

}  // namespace monocat
