#include "monocat/solver.hpp"

#include <algorithm>
#include <cmath>

#include "monocat/reference.hpp"

namespace monocat {

// ---------------------------------------------------------------- Categorization

Categorization Categorization::make(const ReceiverCdf& r, std::vector<Pool> pools) {
  const auto& sup = r.support();
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const Pool& p = pools[i];
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.hi > p.lo)) {
      throw InvalidInput("pool must be nondegenerate: [" + std::to_string(p.lo) + ", " + std::to_string(p.hi) + ")");
    }
    if (p.lo < sup.lo || p.hi > sup.hi) throw InvalidInput("pool lies outside the support");
    if (i > 0 && p.lo < pools[i - 1].hi) throw InvalidInput("pools must be sorted and disjoint");
  }
  Categorization c;
  c.support_ = sup;
  c.percentile_pools_.reserve(pools.size());
  for (const Pool& p : pools) c.percentile_pools_.push_back({r(p.lo), r(p.hi)});
  c.pools_ = std::move(pools);
  return c;
}

Categorization Categorization::full_pooling(const ReceiverCdf& r) {
  return make(r, {{r.support().lo, r.support().hi}});
}

Categorization Categorization::full_separation(const ReceiverCdf& r) { return make(r, {}); }

std::optional<std::size_t> Categorization::pool_index(double x) const {
  auto it = std::upper_bound(pools_.begin(), pools_.end(), x, [](double v, const Pool& p) { return v < p.lo; });
  if (it == pools_.begin()) return std::nullopt;
  --it;
  if (it->contains(x)) return static_cast<std::size_t>(std::distance(pools_.begin(), it));
  return std::nullopt;
}

bool Categorization::is_full_pooling() const {
  return pools_.size() == 1 && pools_[0].lo == support_.lo && pools_[0].hi == support_.hi;
}

double Categorization::pooled_measure() const {
  double total = 0.0;
  for (const Pool& p : pools_) total += p.width();
  return total;
}

// ---------------------------------------------------------------- PercentileCurve

bool PercentileCurve::is_vertex(std::size_t k) const { return std::binary_search(hull.begin(), hull.end(), k); }

double PercentileCurve::max_gap() const {
  double g = 0.0;
  for (std::size_t k = 0; k < env.size(); ++k) g = std::max(g, h[k] - env[k]);
  return g;
}

namespace {

PercentileCurve blank_curve(const SenderWeighting& s, const ReceiverCdf& r, int m) {
  if (!(s.support() == r.support())) throw InvalidInput("sender and receiver supports differ");
  if (m < 3) throw InvalidInput("percentile grid needs at least 3 points");
  PercentileCurve c;
  c.z.resize(static_cast<std::size_t>(m));
  c.h.resize(static_cast<std::size_t>(m));
  c.z.front() = 0.0;
  c.h.front() = s.value_at_lo();
  c.z.back() = 1.0;
  c.h.back() = 1.0;
  return c;
}

}  // namespace

PercentileCurve compose_h(const SenderWeighting& s, const ReceiverCdf& r, int m) {
  PercentileCurve c = blank_curve(s, r, m);
  const double step = 1.0 / static_cast<double>(m - 1);
#pragma omp parallel for schedule(static)
  for (int k = 1; k < m - 1; ++k) {
    const double z = static_cast<double>(k) * step;
    c.z[static_cast<std::size_t>(k)] = z;
    c.h[static_cast<std::size_t>(k)] = s(r.inverse(z));
  }
  return c;
}

PercentileCurve reference::compose_h(const SenderWeighting& s, const ReceiverCdf& r, int m) {
  PercentileCurve c = blank_curve(s, r, m);
  const double step = 1.0 / static_cast<double>(m - 1);
  for (int k = 1; k < m - 1; ++k) {
    const double z = static_cast<double>(k) * step;
    c.z[static_cast<std::size_t>(k)] = z;
    c.h[static_cast<std::size_t>(k)] = s(r.inverse(z));
  }
  return c;
}

namespace {

double cross(const PercentileCurve& c, std::size_t a, std::size_t b, std::size_t i) {
  return (c.z[b] - c.z[a]) * (c.h[i] - c.h[a]) - (c.h[b] - c.h[a]) * (c.z[i] - c.z[a]);
}

void classify(PercentileCurve& c) {
  const std::size_t n = c.points();
  std::vector<std::uint8_t> positive(n, 0);
  for (std::size_t k = 1; k + 1 < n; ++k) positive[k] = (c.h[k] - c.env[k]) > c.tol;

  c.pool_spans.clear();
  for (std::size_t k = 1; k + 1 < n;) {
    if (!positive[k]) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < n && positive[j + 1]) ++j;
    const std::size_t start = k - 1;
    const std::size_t end = j + 1;
    // A lone contact point between two runs only splits them if it is a hull vertex.
    if (!c.pool_spans.empty() && c.pool_spans.back().second == start && !c.is_vertex(start)) {
      c.pool_spans.back().second = end;
    } else {
      c.pool_spans.emplace_back(start, end);
    }
    k = j + 1;
  }

  c.pooled.assign(c.cells(), 0);
  for (auto [s, e] : c.pool_spans) {
    for (std::size_t k = s; k < e; ++k) c.pooled[k] = 1;
  }

  // Piecewise-linear priors make H affine between neighbouring knots, so only hull
  // segments covering at least 1% of the percentile axis count as ties.
  c.affine_spans.clear();
  const std::size_t min_cells = std::max<std::size_t>(2, c.cells() / 100);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < c.cells(); ++k) {
    while (seg + 1 < c.hull.size() && c.hull[seg + 1] <= k) ++seg;
    const bool long_segment = seg + 1 < c.hull.size() && c.hull[seg + 1] - c.hull[seg] >= min_cells;
    if (c.pooled[k] || !long_segment) continue;
    if (!c.affine_spans.empty() && c.affine_spans.back().second == k && c.affine_spans.back().first >= c.hull[seg]) {
      c.affine_spans.back().second = k + 1;
    } else {
      c.affine_spans.emplace_back(k, k + 1);
    }
  }
}

}  // namespace

PercentileCurve lower_convex_envelope(PercentileCurve c, double tol) {
  const std::size_t n = c.points();
  c.tol = tol;
  c.hull.clear();
  c.hull.reserve(n);
  // Rounding noise in h must not leave collinear points as vertices.
  constexpr double kCollinear = 1e-14;
  for (std::size_t i = 0; i < n; ++i) {
    while (c.hull.size() >= 2 && cross(c, c.hull[c.hull.size() - 2], c.hull.back(), i) <= kCollinear) {
      c.hull.pop_back();
    }
    c.hull.push_back(i);
  }
  c.env.assign(n, 0.0);
  for (std::size_t v = 0; v + 1 < c.hull.size(); ++v) {
    const std::size_t a = c.hull[v];
    const std::size_t b = c.hull[v + 1];
    const double slope = (c.h[b] - c.h[a]) / (c.z[b] - c.z[a]);
    c.env[a] = c.h[a];
    for (std::size_t k = a + 1; k < b; ++k) c.env[k] = c.h[a] + slope * (c.z[k] - c.z[a]);
  }
  c.env.back() = c.h.back();
  classify(c);
  return c;
}

Categorization extract_categorization(const PercentileCurve& curve, const ReceiverCdf& r) {
  if (!curve.has_envelope()) throw InvalidInput("envelope has not been computed");
  std::vector<Pool> pools;
  pools.reserve(curve.pool_spans.size());
  for (auto [s, e] : curve.pool_spans) {
    const double lo = s == 0 ? r.support().lo : r.inverse(curve.z[s]);
    const double hi = e + 1 == curve.points() ? r.support().hi : r.inverse(curve.z[e]);
    pools.push_back({lo, hi});
  }
  return Categorization::make(r, std::move(pools));
}

Solution solve(const SenderWeighting& s, const ReceiverCdf& r, int m, double tol) {
  auto curve = lower_convex_envelope(compose_h(s, r, m), tol);
  auto cat = extract_categorization(curve, r);
  return {std::move(curve), std::move(cat)};
}

double first_separating_quality(const PercentileCurve& curve, const ReceiverCdf& r) {
  for (std::size_t k = 0; k < curve.cells(); ++k) {
    if (!curve.pooled[k]) return k == 0 ? r.support().lo : r.inverse(curve.z[k]);
  }
  return r.support().hi;
}

bool is_globally_affine(const PercentileCurve& curve, double tol) {
  const double h0 = curve.h.front();
  const double h1 = curve.h.back();
  for (std::size_t k = 0; k < curve.points(); ++k) {
    if (std::abs(curve.h[k] - (h0 + curve.z[k] * (h1 - h0))) > tol) return false;
  }
  return true;
}

std::pair<SenderWeighting, ReceiverCdf> flip_problem(const SenderWeighting& s, const ReceiverCdf& r) {
  if (s.jump_at_lo() != 0.0) throw FlipUndefined("flip undefined: sender weighting jumps at lo");
  if (s.value_at_lo() != 0.0) throw FlipUndefined("flip undefined: S(lo) != 0");
  if (!s.is_cdf()) throw FlipUndefined("flip undefined: sender weighting is not monotone");
  try {
    auto receiver = ReceiverCdf::from_knots(s.support(), {s.xs().begin(), s.xs().end()},
                                            {s.values().begin(), s.values().end()}, s.smooth_positive_density());
    return {SenderWeighting::from_receiver(r), std::move(receiver)};
  } catch (const InvalidInput& e) {
    throw FlipUndefined(std::string("flip undefined: ") + e.what());
  }
}

}  // namespace monocat
