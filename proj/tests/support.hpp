#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "monocat/schooling.hpp"

namespace testkit {

using namespace monocat;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int pick(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

/// A strictly increasing cdf family on [0, 1]-relative coordinates.
inline FamilySpec random_cdf_family(std::mt19937_64& rng, int depth = 0) {
  switch (pick(rng, depth == 0 ? 6 : 5)) {
    case 0:
      return FamilySpec::power(uniform(rng, 0.6, 3.0));
    case 1:
      return FamilySpec::logistic(uniform(rng, 0.2, 0.8), uniform(rng, 0.05, 0.3));
    case 2:
      return FamilySpec::reflected_power(uniform(rng, 0.6, 3.0));
    case 3:
      return FamilySpec::exponential(uniform(rng, 0.5, 4.0) * (pick(rng, 2) ? 1.0 : -1.0));
    case 4:
      return FamilySpec::sine_wave(uniform(rng, -0.8, 0.8), static_cast<double>(1 + pick(rng, 3)));
    default: {
      std::vector<std::pair<double, FamilySpec>> parts;
      const int n = 2 + pick(rng, 2);
      for (int i = 0; i < n; ++i) parts.emplace_back(uniform(rng, 0.2, 1.0), random_cdf_family(rng, depth + 1));
      return FamilySpec::mixture(std::move(parts));
    }
  }
}

/// Families used by the oracle checks: mixtures, powers and logistics.
inline FamilySpec random_oracle_family(std::mt19937_64& rng) {
  switch (pick(rng, 3)) {
    case 0:
      return FamilySpec::power(uniform(rng, 0.6, 3.0));
    case 1:
      return FamilySpec::logistic(uniform(rng, 0.2, 0.8), uniform(rng, 0.05, 0.3));
    default: {
      std::vector<std::pair<double, FamilySpec>> parts;
      const int n = 2 + pick(rng, 2);
      for (int i = 0; i < n; ++i) {
        parts.emplace_back(uniform(rng, 0.2, 1.0), pick(rng, 2) ? FamilySpec::power(uniform(rng, 0.6, 3.0))
                                                                : FamilySpec::logistic(uniform(rng, 0.1, 0.9),
                                                                                       uniform(rng, 0.04, 0.2)));
      }
      return FamilySpec::mixture(std::move(parts));
    }
  }
}

struct Instance {
  SenderWeighting s;
  ReceiverCdf r;
};

inline Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto sup = QualitySupport::make(0.0, 1.0);
  auto r = build_receiver(random_oracle_family(rng), sup);
  auto s = build_sender(random_oracle_family(rng), sup);
  return {std::move(s), std::move(r)};
}

inline Instance random_cdf_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto sup = QualitySupport::make(0.0, 1.0);
  auto r = build_receiver(random_cdf_family(rng), sup);
  auto s = build_sender(random_cdf_family(rng), sup);
  return {std::move(s), std::move(r)};
}

/// Random grading problem satisfying Condition C, sometimes on a support away from 0
/// so that the constant K is exercised. F0 is floored at R.
inline SchoolingConfig random_school(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double lo = pick(rng, 2) ? 0.0 : uniform(rng, 0.1, 1.0);
  const auto sup = QualitySupport::make(lo, lo + uniform(rng, 0.5, 2.0));
  ScalarFunction cost;
  switch (pick(rng, 3)) {
    case 0: {
      const double slope = uniform(rng, 0.2, 2.0);
      cost = ScalarFunction::poly({uniform(rng, 0.5, 2.0) + slope * sup.hi, -slope});
      break;
    }
    case 1:
      cost = ScalarFunction::inverse(uniform(rng, 0.5, 2.0), uniform(rng, 0.05, 0.5) - lo);
      break;
    default:
      cost = ScalarFunction::exp(uniform(rng, 1.0, 3.0), -uniform(rng, 0.2, 2.0));
      break;
  }
  const double lambda = uniform(rng, 0.0, 0.95) * cost(sup.hi);
  const double sigma = pick(rng, 4) == 0 ? 0.0 : uniform(rng, 0.0, 1.0);
  const auto g = build_sender(random_cdf_family(rng), sup);
  auto r = build_receiver(random_cdf_family(rng), sup);
  std::vector<double> xs(kDefaultKnots);
  std::vector<double> f0(kDefaultKnots);
  for (int i = 0; i < kDefaultKnots; ++i) {
    xs[i] = sup.lo + (sup.hi - sup.lo) * i / (kDefaultKnots - 1);
    f0[i] = std::max(g(xs[i]), r(xs[i]));
  }
  xs.back() = sup.hi;
  f0.front() = 0.0;
  f0.back() = 1.0;
  return {SenderWeighting::from_knots(sup, std::move(xs), std::move(f0), 0.0), std::move(r), cost, lambda, sigma};
}

inline std::vector<double> quality_grid(const PercentileCurve& c, const ReceiverCdf& r) {
  std::vector<double> xs(c.points());
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = r.inverse(c.z[k]);
  xs.front() = r.support().lo;
  xs.back() = r.support().hi;
  return xs;
}

}  // namespace testkit
