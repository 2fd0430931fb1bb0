#include "monocat/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace monocat {

namespace {

void check_knot_axis(const QualitySupport& support, std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidInput("need at least two knots");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InvalidInput("knot qualities must be strictly increasing");
  }
  const double tol = 1e-12 * support.width();
  if (std::abs(xs.front() - support.lo) > tol || std::abs(xs.back() - support.hi) > tol) {
    throw InvalidInput("knots must span the support exactly");
  }
}

// Index i with xs[i] <= x < xs[i+1], clamped to a valid cell.
std::size_t cell_of(std::span<const double> xs, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  auto i = static_cast<std::size_t>(std::distance(xs.begin(), it));
  if (i == 0) return 0;
  return std::min(i - 1, xs.size() - 2);
}

double lerp_at(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const std::size_t i = cell_of(xs, x);
  const double f = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + f * (ys[i + 1] - ys[i]);
}

}  // namespace

std::vector<double> merge_knots(std::span<const double> a, std::span<const double> b, double width) {
  std::vector<double> all;
  all.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(all));
  std::vector<double> out;
  out.reserve(all.size());
  const double eps = 1e-12 * width;
  for (double x : all) {
    if (!out.empty() && x - out.back() <= eps) continue;
    out.push_back(x);
  }
  // On a collision the knot from b survives exactly.
  for (double x : b) {
    auto it = std::lower_bound(out.begin(), out.end(), x - eps);
    if (it != out.end() && std::abs(*it - x) <= eps) *it = x;
  }
  return out;
}

// ---------------------------------------------------------------- ReceiverCdf

ReceiverCdf ReceiverCdf::from_knots(const QualitySupport& support, std::vector<double> xs,
                                    std::vector<double> ps, bool smooth_positive_density) {
  check_knot_axis(support, xs);
  if (ps.size() != xs.size()) throw InvalidInput("receiver cdf: knot arrays differ in length");
  if (std::abs(ps.front()) > 1e-12 || std::abs(ps.back() - 1.0) > 1e-9) {
    throw InvalidInput("receiver cdf must satisfy R(lo) = 0 and R(hi) = 1");
  }
  ps.front() = 0.0;
  ps.back() = 1.0;
  for (std::size_t i = 1; i < ps.size(); ++i) {
    if (!std::isfinite(ps[i]) || ps[i] - ps[i - 1] < kSlopeFloor) {
      throw InvalidInput("receiver cdf must be strictly increasing (increment below slope floor at x = " +
                         std::to_string(xs[i]) + ")");
    }
  }
  xs.front() = support.lo;
  xs.back() = support.hi;
  ReceiverCdf r;
  r.support_ = support;
  r.xs_ = std::move(xs);
  r.ps_ = std::move(ps);
  r.smooth_ = smooth_positive_density;
  r.moments_.resize(r.xs_.size());
  r.moments_[0] = 0.0;
  for (std::size_t i = 1; i < r.xs_.size(); ++i) {
    r.moments_[i] = r.moments_[i - 1] + (r.ps_[i] - r.ps_[i - 1]) * 0.5 * (r.xs_[i] + r.xs_[i - 1]);
  }
  return r;
}

double ReceiverCdf::operator()(double x) const { return lerp_at(xs_, ps_, x); }

double ReceiverCdf::inverse(double z) const {
  if (z <= 0.0) return support_.lo;
  if (z >= 1.0) return support_.hi;
  return lerp_at(ps_, xs_, z);
}

double ReceiverCdf::moment_to(double x) const {
  if (x <= support_.lo) return 0.0;
  if (x >= support_.hi) return moments_.back();
  const std::size_t i = cell_of(xs_, x);
  const double dp = (*this)(x) - ps_[i];
  return moments_[i] + dp * 0.5 * (xs_[i] + x);
}

double ReceiverCdf::first_moment(double a, double b) const { return moment_to(b) - moment_to(a); }

double ReceiverCdf::conditional_mean(double a, double b) const {
  const double mass = (*this)(b) - (*this)(a);
  if (!(mass > 0.0)) throw NumericFailure("pool carries zero receiver mass");
  return first_moment(a, b) / mass;
}

// ---------------------------------------------------------------- SenderWeighting

double SignedGridMeasure::total() const {
  return std::accumulate(cell_masses.begin(), cell_masses.end(), atom_at_lo);
}

SenderWeighting SenderWeighting::from_knots(const QualitySupport& support, std::vector<double> xs,
                                            std::vector<double> values, double value_at_lo,
                                            bool smooth_positive_density) {
  check_knot_axis(support, xs);
  if (values.size() != xs.size()) throw InvalidInput("sender weighting: knot arrays differ in length");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("sender weighting has non-finite values");
  }
  if (!std::isfinite(value_at_lo)) throw InvalidInput("sender weighting: S(lo) must be finite");
  if (std::abs(values.back() - 1.0) > 1e-9) throw InvalidInput("sender weighting must satisfy S(hi) = 1");
  values.back() = 1.0;
  if (values.front() - value_at_lo < -1e-15) {
    throw InvalidInput("sender weighting may only jump upward at lo");
  }
  xs.front() = support.lo;
  xs.back() = support.hi;
  SenderWeighting s;
  s.support_ = support;
  s.xs_ = std::move(xs);
  s.values_ = std::move(values);
  s.value_at_lo_ = std::min(value_at_lo, s.values_.front());
  s.smooth_ = smooth_positive_density;
  return s;
}

SenderWeighting SenderWeighting::from_measure(const QualitySupport& support, const SignedGridMeasure& m,
                                              double value_at_lo, bool smooth_positive_density) {
  if (m.cell_masses.size() + 1 != m.grid.size()) throw InvalidInput("measure: grid/mass size mismatch");
  std::vector<double> values(m.grid.size());
  values[0] = value_at_lo + m.atom_at_lo;
  for (std::size_t i = 0; i < m.cell_masses.size(); ++i) values[i + 1] = values[i] + m.cell_masses[i];
  return from_knots(support, m.grid, std::move(values), value_at_lo, smooth_positive_density);
}

SenderWeighting SenderWeighting::from_receiver(const ReceiverCdf& r) {
  return from_knots(r.support(), {r.xs().begin(), r.xs().end()}, {r.ps().begin(), r.ps().end()}, 0.0,
                    r.smooth_positive_density());
}

double SenderWeighting::operator()(double x) const {
  if (x <= support_.lo) return value_at_lo_;
  return lerp_at(xs_, values_, x);
}

SignedGridMeasure SenderWeighting::measure() const {
  SignedGridMeasure m;
  m.grid = xs_;
  m.cell_masses.resize(xs_.size() - 1);
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) m.cell_masses[i] = values_[i + 1] - values_[i];
  m.atom_at_lo = jump_at_lo();
  return m;
}

bool SenderWeighting::is_cdf() const {
  if (value_at_lo_ != 0.0 || jump_at_lo() != 0.0) return false;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] < values_[i - 1]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- builders

ReceiverCdf build_receiver(const FamilySpec& family, const QualitySupport& support, int n) {
  auto sampled = sample_family(family, support, n);
  return ReceiverCdf::from_knots(support, std::move(sampled.xs), std::move(sampled.ys),
                                 sampled.smooth_positive_density);
}

SenderWeighting build_sender(const FamilySpec& family, const QualitySupport& support, int n, bool normalize) {
  auto sampled = sample_family(family, support, n);
  double value_at_lo = family.param("value_at_lo", sampled.ys.front());
  for (double v : sampled.ys) {
    if (!std::isfinite(v)) throw InvalidInput("sender family produced non-finite values");
  }
  const double top = sampled.ys.back();
  if (normalize && std::abs(top - 1.0) > 0.0) {
    if (!(std::abs(top) > 1e-300)) throw InvalidInput("sender family cannot be normalized: S(hi) = 0");
    for (double& v : sampled.ys) v /= top;
    value_at_lo /= top;
  } else if (std::abs(top - 1.0) > 1e-12) {
    throw InvalidInput("sender family has S(hi) != 1 and normalization is disabled");
  }
  return SenderWeighting::from_knots(support, std::move(sampled.xs), std::move(sampled.ys), value_at_lo,
                                     sampled.smooth_positive_density);
}

// ---------------------------------------------------------------- transforms

SenderWeighting transform_state_dependent(const SenderWeighting& s, const QualityFn& alpha) {
  SignedGridMeasure m = s.measure();
  const auto& g = m.grid;
  bool positive = true;
  const double a_lo = alpha(g.front());
  positive = positive && a_lo > 0.0;
  m.atom_at_lo *= a_lo;
  for (std::size_t i = 0; i < m.cell_masses.size(); ++i) {
    const double w = alpha(0.5 * (g[i] + g[i + 1]));
    positive = positive && w > 0.0;
    m.cell_masses[i] *= w;
  }
  const double total = s.value_at_lo() + m.total();
  if (!std::isfinite(total) || !(total > 0.0)) {
    throw NumericFailure("transformed sender weighting has nonpositive total mass");
  }
  for (double& c : m.cell_masses) c /= total;
  m.atom_at_lo /= total;
  return SenderWeighting::from_measure(s.support(), m, s.value_at_lo() / total,
                                       s.smooth_positive_density() && positive);
}

SenderWeighting transform_retail(const ReceiverCdf& r, const QualityFn& pi) {
  return transform_state_dependent(SenderWeighting::from_receiver(r), pi);
}

SenderWeighting transform_peer_effects(const ReceiverCdf& r, const QualityFn& lambda2) {
  return transform_state_dependent(SenderWeighting::from_receiver(r), lambda2);
}

SenderWeighting transform_quadratic(const ReceiverCdf& r, const QualityFn& lambda1, double lambda2) {
  return transform_state_dependent(SenderWeighting::from_receiver(r),
                                   [&](double x) { return lambda1(x) + lambda2 * x; });
}

std::pair<SenderWeighting, ReceiverCdf> transform_group_mixture(std::span<const GroupPrior> groups) {
  if (groups.empty()) throw InvalidInput("group mixture: need at least one group");
  const QualitySupport support = groups.front().cdf.support();
  double total_w = 0.0;
  std::vector<double> knots(groups.front().cdf.xs().begin(), groups.front().cdf.xs().end());
  bool smooth = true;
  for (const auto& g : groups) {
    if (!(g.cdf.support() == support)) throw InvalidInput("group mixture: mismatched supports");
    if (!g.cdf.is_cdf()) throw InvalidInput("group mixture: every group prior must be a cdf");
    if (!(g.weight >= 0.0) || !std::isfinite(g.weight)) throw InvalidInput("group mixture: weights must be >= 0");
    total_w += g.weight;
    knots = merge_knots(knots, g.cdf.xs(), support.width());
    smooth = smooth && g.cdf.smooth_positive_density();
  }
  if (!(total_w > 0.0)) throw InvalidInput("group mixture: weights sum to zero");
  std::vector<double> s_vals(knots.size());
  std::vector<double> r_vals(knots.size());
  const double count = static_cast<double>(groups.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    double s = 0.0;
    double r = 0.0;
    for (const auto& g : groups) {
      const double f = g.cdf(knots[i]);
      s += g.weight * f;
      r += f;
    }
    s_vals[i] = s / total_w;
    r_vals[i] = r / count;
  }
  s_vals.front() = 0.0;
  r_vals.front() = 0.0;
  auto sender = SenderWeighting::from_knots(support, knots, std::move(s_vals), 0.0, smooth);
  auto receiver = ReceiverCdf::from_knots(support, std::move(knots), std::move(r_vals), smooth);
  return {std::move(sender), std::move(receiver)};
}

}  // namespace monocat
