#include "monocat/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "monocat/reference.hpp"

namespace monocat {

// ---------------------------------------------------------------- posterior

PosteriorFunction::PosteriorFunction(Categorization cat, const ReceiverCdf& r) : cat_(std::move(cat)) {
  means_.reserve(cat_.pools().size());
  for (const Pool& p : cat_.pools()) means_.push_back(r.conditional_mean(p.lo, p.hi));
}

double PosteriorFunction::operator()(double x) const {
  if (auto i = cat_.pool_index(x)) return means_[*i];
  return x;
}

double PosteriorFunction::left_limit(double x) const {
  const auto& pools = cat_.pools();
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (x > pools[i].lo && x <= pools[i].hi) return means_[i];
  }
  return x;
}

double posterior_mean(const Categorization& a, const ReceiverCdf& r, double x) {
  if (auto i = a.pool_index(x)) {
    const Pool& p = a.pools()[*i];
    return r.conditional_mean(p.lo, p.hi);
  }
  return x;
}

// ---------------------------------------------------------------- weighting Psi

namespace {

double pool_psi(const Pool& p, const SenderWeighting& s, const ReceiverCdf& r, double x) {
  const double rp = r(p.lo);
  const double slope = (s(p.hi) - s(p.lo)) / (r(p.hi) - rp);
  return s(p.lo) + (r(x) - rp) * slope;
}

std::vector<double> value_grid(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r) {
  const double width = s.support().width();
  auto grid = merge_knots(s.xs(), r.xs(), width);
  std::vector<double> edges;
  edges.reserve(2 * a.pools().size());
  for (const Pool& p : a.pools()) {
    edges.push_back(p.lo);
    edges.push_back(p.hi);
  }
  return merge_knots(grid, edges, width);
}

}  // namespace

double psi_value(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r, double x) {
  if (auto i = a.pool_index(x)) return pool_psi(a.pools()[*i], s, r, x);
  return s(x);
}

WeightingPsi weighting_psi(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r,
                           std::span<const double> grid) {
  WeightingPsi out;
  out.xs.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  for (double x : grid) out.values.push_back(psi_value(a, s, r, x));
  return out;
}

WeightingPsi weighting_psi(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r) {
  const auto grid = value_grid(a, s, r);
  return weighting_psi(a, s, r, grid);
}

// ---------------------------------------------------------------- sender value

double ValueRoutes::max_disagreement() const {
  return std::max({std::abs(direct - psi), std::abs(direct - ibp), std::abs(psi - ibp)});
}

ValueRoutes sender_value_routes(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r) {
  const auto grid = value_grid(a, s, r);
  const PosteriorFunction post(a, r);
  const double lo = s.support().lo;
  const auto lo_pool = a.pool_index(lo);

  ValueRoutes v;
  v.direct = post(lo) * s.jump_at_lo();
  v.psi = lo_pool ? 0.0 : lo * s.jump_at_lo();
  // [x Psi] at the endpoints minus the (hi - lo) absorbed into int (1 - Psi).
  v.ibp = (1.0 - s.value_at_lo()) * lo;

  double s_left = s.right_limit_at_lo();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double x0 = grid[i];
    const double x1 = grid[i + 1];
    const double mid = 0.5 * (x0 + x1);
    const double s_right = s(x1);
    double psi0 = 0.0;
    double psi1 = 0.0;
    if (auto k = a.pool_index(mid)) {
      const Pool& p = a.pools()[*k];
      v.direct += post.pool_means()[*k] * (s_right - s_left);
      psi0 = pool_psi(p, s, r, x0);
      psi1 = pool_psi(p, s, r, x1);
    } else {
      v.direct += mid * (s_right - s_left);
      psi0 = s_left;
      psi1 = s_right;
    }
    v.psi += mid * (psi1 - psi0);
    v.ibp += (1.0 - 0.5 * (psi0 + psi1)) * (x1 - x0);
    s_left = s_right;
  }
  return v;
}

double sender_value(const Categorization& a, const SenderWeighting& s, const ReceiverCdf& r, ValueMethod method) {
  const auto v = sender_value_routes(a, s, r);
  switch (method) {
    case ValueMethod::direct:
      return v.direct;
    case ValueMethod::psi:
      return v.psi;
    case ValueMethod::ibp:
      return v.ibp;
  }
  return v.direct;
}

std::vector<double> sender_values(std::span<const Categorization> cats, const SenderWeighting& s,
                                  const ReceiverCdf& r) {
  std::vector<double> out(cats.size());
  const auto n = static_cast<long>(cats.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = sender_value(cats[k], s, r);
  }
  return out;
}

double psi_dominance_margin(const Categorization& best, std::span<const Categorization> others,
                            const SenderWeighting& s, const ReceiverCdf& r, std::span<const double> grid) {
  std::vector<double> base(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) base[k] = psi_value(best, s, r, grid[k]);
  double margin = std::numeric_limits<double>::infinity();
  const auto n = static_cast<long>(others.size());
#pragma omp parallel for reduction(min : margin) schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    const auto& cat = others[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < grid.size(); ++k) {
      margin = std::min(margin, psi_value(cat, s, r, grid[k]) - base[k]);
    }
  }
  return margin;
}

std::vector<double> reference::sender_values(std::span<const Categorization> cats, const SenderWeighting& s,
                                             const ReceiverCdf& r) {
  std::vector<double> out;
  out.reserve(cats.size());
  for (const auto& c : cats) out.push_back(sender_value(c, s, r));
  return out;
}

double reference::psi_dominance_margin(const Categorization& best, std::span<const Categorization> others,
                                       const SenderWeighting& s, const ReceiverCdf& r,
                                       std::span<const double> grid) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& cat : others) {
    for (double x : grid) margin = std::min(margin, psi_value(cat, s, r, x) - psi_value(best, s, r, x));
  }
  return margin;
}

// ---------------------------------------------------------------- DP oracle

namespace {

struct OracleTables {
  std::vector<double> x;       // n + 1 cell edges
  std::vector<double> r_mass;  // prefix sums, size n + 1
  std::vector<double> moment;
  std::vector<double> s_mass;
  std::vector<double> reveal;  // per-cell midpoint * S-mass
};

OracleTables oracle_tables(const SenderWeighting& s, const ReceiverCdf& r, int n) {
  OracleTables t;
  const auto cells = static_cast<std::size_t>(n);
  const auto& sup = r.support();
  t.x.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    t.x[i] = sup.lo + sup.width() * static_cast<double>(i) / static_cast<double>(n);
  }
  t.x.back() = sup.hi;
  t.r_mass.assign(cells + 1, 0.0);
  t.moment.assign(cells + 1, 0.0);
  t.s_mass.assign(cells + 1, 0.0);
  t.reveal.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double ds = s(t.x[i + 1]) - s(t.x[i]);  // cell 0 absorbs the atom at lo
    t.r_mass[i + 1] = t.r_mass[i] + (r(t.x[i + 1]) - r(t.x[i]));
    t.moment[i + 1] = t.moment[i] + r.first_moment(t.x[i], t.x[i + 1]);
    t.s_mass[i + 1] = t.s_mass[i] + ds;
    t.reveal[i] = 0.5 * (t.x[i] + t.x[i + 1]) * ds;
  }
  return t;
}

inline double segment_value(const OracleTables& t, std::size_t i, std::size_t j) {
  if (j == i + 1) return t.reveal[i];
  return (t.moment[j] - t.moment[i]) / (t.r_mass[j] - t.r_mass[i]) * (t.s_mass[j] - t.s_mass[i]);
}

void check_oracle_args(const SenderWeighting& s, const ReceiverCdf& r, int n, int max_n) {
  if (n < 1) throw InvalidInput("oracle grid must have at least one cell");
  if (n > max_n) {
    throw InvalidInput("oracle grid n = " + std::to_string(n) + " exceeds n_max_oracle = " + std::to_string(max_n));
  }
  if (!(s.support() == r.support())) throw InvalidInput("sender and receiver supports differ");
}

// val(j) = max_{i<j} val(i) + seg(i, j); ties go to the partition with fewer pools.
template <class Segment>
OracleResult run_recurrence(const ReceiverCdf& r, const OracleTables& t, std::size_t cells, Segment seg) {
  constexpr double kTie = 1e-12;
  std::vector<double> best(cells + 1, -std::numeric_limits<double>::infinity());
  std::vector<int> pools(cells + 1, 0);
  std::vector<std::size_t> choice(cells + 1, 0);
  best[0] = 0.0;
  for (std::size_t j = 1; j <= cells; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = best[i] + seg(i, j);
      const int cand_pools = pools[i] + (j - i >= 2 ? 1 : 0);
      if (cand > best[j] + kTie || (std::abs(cand - best[j]) <= kTie && cand_pools < pools[j])) {
        best[j] = cand;
        pools[j] = cand_pools;
        choice[j] = i;
      }
    }
  }

  std::vector<Pool> out;
  for (std::size_t j = cells; j > 0;) {
    const std::size_t i = choice[j];
    if (j - i >= 2) out.push_back({t.x[i], t.x[j]});
    j = i;
  }
  std::reverse(out.begin(), out.end());
  return {best[cells], Categorization::make(r, std::move(out))};
}

}  // namespace

OracleResult dp_oracle(const SenderWeighting& s, const ReceiverCdf& r, int n, int max_n) {
  check_oracle_args(s, r, n, max_n);
  const auto t = oracle_tables(s, r, n);
  const auto cells = static_cast<std::size_t>(n);
  const std::size_t stride = cells + 1;

  std::vector<double> table(stride * stride, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (long ii = 0; ii < static_cast<long>(cells); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j <= cells; ++j) table[i * stride + j] = segment_value(t, i, j);
  }
  return run_recurrence(r, t, cells, [&](std::size_t i, std::size_t j) { return table[i * stride + j]; });
}

OracleResult reference::dp_oracle(const SenderWeighting& s, const ReceiverCdf& r, int n, int max_n) {
  check_oracle_args(s, r, n, max_n);
  const auto t = oracle_tables(s, r, n);
  return run_recurrence(r, t, static_cast<std::size_t>(n),
                        [&](std::size_t i, std::size_t j) { return segment_value(t, i, j); });
}

// ---------------------------------------------------------------- random categorizations

Categorization random_categorization(const ReceiverCdf& r, std::uint64_t seed, int max_pools, int grid_points) {
  if (max_pools < 0) throw InvalidInput("max_pools must be >= 0");
  if (grid_points < 3) throw InvalidInput("grid_points must be >= 3");
  std::mt19937_64 rng(seed);
  const auto pool_count = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(max_pools + 1));
  const auto last = static_cast<std::uint64_t>(grid_points - 1);
  const std::size_t wanted = std::min<std::size_t>(2 * pool_count, static_cast<std::size_t>(last + 1));
  std::set<std::uint64_t> picks;
  while (picks.size() < wanted) picks.insert(rng() % (last + 1));
  std::vector<std::uint64_t> idx(picks.begin(), picks.end());

  auto quality = [&](std::uint64_t k) {
    if (k == 0) return r.support().lo;
    if (k == last) return r.support().hi;
    return r.inverse(static_cast<double>(k) / static_cast<double>(last));
  };
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  for (std::size_t i = 0; i + 1 < idx.size(); i += 2) spans.emplace_back(idx[i], idx[i + 1]);
  // Occasionally close the gap to the next pool so adjacent pools get exercised.
  for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
    if (rng() % 2 == 0) spans[i].second = spans[i + 1].first;
  }
  std::vector<Pool> out;
  out.reserve(spans.size());
  for (auto [a, b] : spans) out.push_back({quality(a), quality(b)});
  return Categorization::make(r, std::move(out));
}

}  // namespace monocat
