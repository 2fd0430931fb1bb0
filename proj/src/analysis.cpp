#include "monocat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace monocat {

namespace {

struct LocalGrid {
  std::vector<double> z;
  std::vector<double> x;
};

LocalGrid local_grid(const ReceiverCdf& r, double a, double b, int m, int min_points) {
  const auto& sup = r.support();
  if (!(b > a)) throw InvalidInput("interval must be nondegenerate");
  if (a < sup.lo || b > sup.hi) throw InvalidInput("interval lies outside the support");
  if (m < 3) throw InvalidInput("percentile grid needs at least 3 points");
  const double wa = r(a);
  const double wb = r(b);
  const auto cells = std::lround(static_cast<double>(m - 1) * (wb - wa));
  const auto count = static_cast<std::size_t>(std::max<long>(min_points, cells + 1));
  LocalGrid g;
  g.z.resize(count);
  g.x.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    g.z[j] = wa + (wb - wa) * static_cast<double>(j) / static_cast<double>(count - 1);
    g.x[j] = r.inverse(g.z[j]);
  }
  g.z.front() = wa;
  g.z.back() = wb;
  g.x.front() = a;
  g.x.back() = b;
  return g;
}

Check second_difference_check(std::span<const double> h, double tol) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < h.size(); ++k) worst = std::min(worst, h[k + 1] - 2.0 * h[k] + h[k - 1]);
  if (h.size() < 3) worst = 0.0;
  return {worst >= -tol, worst};
}

double union_length(std::vector<Pool> all) {
  std::sort(all.begin(), all.end(), [](const Pool& x, const Pool& y) { return x.lo < y.lo; });
  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = -std::numeric_limits<double>::infinity();
  for (const Pool& p : all) {
    if (p.lo > cur_hi) {
      if (std::isfinite(cur_hi)) total += cur_hi - cur_lo;
      cur_lo = p.lo;
      cur_hi = p.hi;
    } else {
      cur_hi = std::max(cur_hi, p.hi);
    }
  }
  if (std::isfinite(cur_hi)) total += cur_hi - cur_lo;
  return total;
}

double intersection_length(const std::vector<Pool>& a, const std::vector<Pool>& b) {
  double total = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) total += hi - lo;
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

}  // namespace

Check check_full_pooling(const SenderWeighting& s, const ReceiverCdf& r, int m, double tol) {
  const auto c = compose_h(s, r, m);
  const double h0 = c.h.front();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.points(); ++k) worst = std::min(worst, (c.h[k] - h0) - (1.0 - h0) * c.z[k]);
  return {worst >= -tol, worst};
}

Check check_full_separation(const SenderWeighting& s, const ReceiverCdf& r, int m, double tol) {
  const auto c = compose_h(s, r, m);
  return second_difference_check(c.h, tol);
}

Check check_fosd_on(const SenderWeighting& s, const ReceiverCdf& r, double a, double b, int m, double tol) {
  const auto g = local_grid(r, a, b, m, 2);
  const double sa = s(a);
  const double za = g.z.front();
  const double slope = (s(b) - sa) / (g.z.back() - za);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.x.size(); ++j) worst = std::min(worst, (s(g.x[j]) - sa) - slope * (g.z[j] - za));
  return {worst >= -tol, worst};
}

Check check_lr_on(const SenderWeighting& s, const ReceiverCdf& r, double a, double b, int m, double tol) {
  const auto g = local_grid(r, a, b, m, 3);
  std::vector<double> h(g.x.size());
  for (std::size_t j = 0; j < g.x.size(); ++j) h[j] = s(g.x[j]);
  return second_difference_check(h, tol);
}

FlipReport flip_report(const SenderWeighting& s, const ReceiverCdf& r, int m) {
  auto [s_flip, r_flip] = flip_problem(s, r);
  auto original = solve(s, r, m);
  auto flipped = solve(s_flip, r_flip, m);

  FlipReport rep;
  const double width = r.support().width();
  rep.degenerate = is_globally_affine(original.curve);
  std::vector<Pool> all = original.categorization.pools();
  all.insert(all.end(), flipped.categorization.pools().begin(), flipped.categorization.pools().end());
  rep.coverage = rep.degenerate ? 1.0 : union_length(std::move(all)) / width;
  rep.overlap = intersection_length(original.categorization.pools(), flipped.categorization.pools()) / width;
  rep.flipped_full_pooling = flipped.categorization.is_full_pooling();
  rep.original = std::move(original.categorization);
  rep.flipped = std::move(flipped.categorization);
  return rep;
}

std::optional<bool> check_alternation(const SenderWeighting& s, const ReceiverCdf& r, const Categorization& a,
                                      int m) {
  if (!s.smooth_positive_density() || !r.smooth_positive_density()) return std::nullopt;
  const double min_gap = 0.5 / static_cast<double>(m - 1);
  const auto& pp = a.percentile_pools();
  for (std::size_t i = 0; i + 1 < pp.size(); ++i) {
    if (pp[i + 1].lo - pp[i].hi < min_gap) return false;
  }
  return true;
}

DiagnosticsReport diagnose(const SenderWeighting& s, const ReceiverCdf& r, const Solution& sol,
                           const std::vector<std::pair<double, double>>& intervals, int m) {
  DiagnosticsReport d;
  const auto& sup = r.support();
  d.full_pooling = check_full_pooling(s, r, m);
  d.full_separation = check_full_separation(s, r, m);
  d.fosd_global = check_fosd_on(s, r, sup.lo, sup.hi, m);
  d.lr_global = check_lr_on(s, r, sup.lo, sup.hi, m);
  d.degenerate_affine = is_globally_affine(sol.curve);

  const auto& c = sol.curve;
  for (auto [b, e] : c.affine_spans) {
    const double lo = b == 0 ? sup.lo : r.inverse(c.z[b]);
    const double hi = e + 1 == c.points() ? sup.hi : r.inverse(c.z[e]);
    d.affine_stretches.push_back({lo, hi});
  }
  for (auto [a, b] : intervals) {
    d.intervals.push_back({a, b, check_fosd_on(s, r, a, b, m), check_lr_on(s, r, a, b, m)});
  }
  try {
    d.flip = flip_report(s, r, m);
  } catch (const FlipUndefined& e) {
    d.flip_error = e.what();
  }
  d.alternation = check_alternation(s, r, sol.categorization, m);
  return d;
}

}  // namespace monocat
