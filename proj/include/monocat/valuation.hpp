#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "monocat/solver.hpp"

namespace monocat {

/// A(x) of a categorization: the receiver's conditional mean on pools, x elsewhere.
class PosteriorFunction {
 public:
  PosteriorFunction(Categorization cat, const ReceiverCdf& r);

  double operator()(double x) const;
  /// Left limit A(x-); equals A(x) away from pool edges.
  double left_limit(double x) const;

  const Categorization& categorization() const { return cat_; }
  const std::vector<double>& pool_means() const { return means_; }

 private:
  Categorization cat_;
  std::vector<double> means_;
};

double posterior_mean(const Categorization& a, const ReceiverCdf& r, double x);

/// Psi(x, A): S on separated qualities, affine in R(x) across each pool.
struct WeightingPsi {
  std::vector<double> xs;
  std::vector<double> values;
};

double psi_value(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r, double x);
WeightingPsi weighting_psi(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r,
                           std::span<const double> grid);
/// On the merged knot grid of S, R and the pool edges.
WeightingPsi weighting_psi(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r);

enum class ValueMethod { direct, psi, ibp };

struct ValueRoutes {
  double direct = 0.0;
  double psi = 0.0;
  double ibp = 0.0;
  double max_disagreement() const;
};

/// int A dS evaluated three ways; each is exact for piecewise-linear S and R.
ValueRoutes sender_value_routes(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r);
double sender_value(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r,
                    ValueMethod method = ValueMethod::direct);

/// Direct-route values for a batch of categorizations (parallel over the batch).
std::vector<double> sender_values(std::span<const Categorization> cats, const SenderWeighting& s,
                                  const ReceiverCdf& r);

/// min over categorizations and grid points of Psi(x, A) - Psi(x, best). Nonnegative
/// (up to rounding) when `best` is optimal.
double psi_dominance_margin(const Categorization& best, std::span<const Categorization> others,
                            const SenderWeighting& s, const ReceiverCdf& r, std::span<const double> grid);

struct OracleResult {
  double value = 0.0;
  Categorization categorization;
};

/// Exact optimum over all monotone partitions of n equal quality cells by dynamic
/// programming. Pooled segments score mean_R * mass_S; singleton cells are revealed
/// at their midpoint.
OracleResult dp_oracle(const SenderWeighting& s, const ReceiverCdf& r, int n, int max_n = kMaxOracleCells);

/// Random monotone categorization with up to `max_pools` pools whose edges sit on the
/// percentile grid z_k = k / (grid_points - 1). Deterministic in `seed`.
Categorization random_categorization(const ReceiverCdf& r, std::uint64_t seed, int max_pools,
                                     int grid_points = 2001);

}  // namespace monocat
