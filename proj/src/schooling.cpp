#include "monocat/schooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace monocat {

namespace {

std::vector<double> uniform_grid(const QualitySupport& sup, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = sup.lo + sup.width() * i / (n - 1);
  xs.back() = sup.hi;
  return xs;
}

std::vector<double> school_grid(const SchoolingConfig& cfg) {
  return merge_knots(cfg.f0.xs(), uniform_grid(cfg.support(), cfg.knots), cfg.support().width());
}

double integral_of_cost(const SchoolingConfig& cfg, std::span<const double> xs) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    total += 0.5 * (cfg.cost(xs[i]) + cfg.cost(xs[i + 1])) * (cfg.f0(xs[i + 1]) - cfg.f0(xs[i]));
  }
  return total;
}

bool learning_valued(const SchoolingConfig& cfg, std::span<const double> xs) {
  return cfg.lambda > cfg.sigma * integral_of_cost(cfg, xs);
}

double net_cost(const SchoolingConfig& cfg, double x) {
  const double d = cfg.cost(x) - cfg.lambda;
  if (!(d > 0.0)) throw NumericFailure("Condition C violated: c(a) - lambda <= 0 at a = " + std::to_string(x));
  return d;
}

}  // namespace

void SchoolingConfig::validate() const {
  if (!(f0.support() == r.support())) throw InvalidInput("f0 and receiver supports differ");
  if (!f0.is_cdf()) throw InvalidInput("f0 must be a continuous cdf with F0(lo) = 0");
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidInput("lambda must be >= 0");
  if (!std::isfinite(sigma) || sigma < 0.0 || sigma > 1.0) throw InvalidInput("sigma must lie in [0, 1]");
  if (knots < 3) throw InvalidInput("knots must be >= 3");
  const auto& sup = support();
  if (!(cost(sup.hi) > lambda)) {
    throw NumericFailure("Condition C violated: c(hi) = " + std::to_string(cost(sup.hi)) +
                         " <= lambda = " + std::to_string(lambda));
  }
  const auto xs = uniform_grid(sup, knots);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double c0 = cost(xs[i]);
    if (!std::isfinite(c0)) throw NumericFailure("effort cost is not finite at a = " + std::to_string(xs[i]));
    if (!(cost(xs[i + 1]) < c0)) {
      throw NumericFailure("effort cost must be strictly decreasing (fails near a = " + std::to_string(xs[i]) + ")");
    }
  }
}

SuffixIntegral learning_surplus(const SchoolingConfig& cfg) {
  SuffixIntegral g;
  g.xs = school_grid(cfg);
  const std::size_t n = g.xs.size();
  g.values.assign(n, 0.0);
  auto w = [&](double x) { return cfg.sigma * cfg.cost(x) - cfg.lambda; };
  double w_right = w(g.xs[n - 1]);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double w_left = w(g.xs[i]);
    g.values[i] = g.values[i + 1] + 0.5 * (w_left + w_right) * (cfg.f0(g.xs[i + 1]) - cfg.f0(g.xs[i]));
    w_right = w_left;
  }
  return g;
}

InducedSender induce_sender(const SchoolingConfig& cfg) {
  cfg.validate();
  const auto g = learning_surplus(cfg);
  const std::size_t n = g.xs.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = cfg.f0(g.xs[i]) + g.values[i] / net_cost(cfg, g.xs[i]);
  values.back() = 1.0;

  InducedSender out;
  out.intrinsic = learning_valued(cfg, g.xs);
  const double lo = cfg.support().lo;
  const double start = out.intrinsic ? std::min(0.0, values.front()) : 0.0;
  out.k = out.intrinsic ? lo * values.front() : 0.0;
  out.s = SenderWeighting::from_knots(cfg.support(), g.xs, std::move(values), start);
  return out;
}

// ---------------------------------------------------------------- learning function

LearningFunction::LearningFunction(std::vector<double> xs, std::vector<double> left, std::vector<double> right)
    : xs_(std::move(xs)), left_(std::move(left)), right_(std::move(right)) {
  if (xs_.size() < 2 || left_.size() != xs_.size() || right_.size() != xs_.size()) {
    throw InvalidInput("learning function needs matching grids of at least two points");
  }
}

double LearningFunction::operator()(double x) const {
  if (x <= xs_.front()) return right_.front();
  if (x >= xs_.back()) return right_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const auto i = static_cast<std::size_t>(std::distance(xs_.begin(), it)) - 1;
  if (x == xs_[i]) return right_[i];
  const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return right_[i] + t * (left_[i + 1] - right_[i]);
}

std::vector<LearningFunction::Jump> LearningFunction::jumps(double tol) const {
  std::vector<Jump> out;
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    const double d = right_[i] - left_[i];
    if (std::abs(d) > tol) out.push_back({xs_[i], d});
  }
  return out;
}

void LearningFunction::perturb(std::size_t i, double delta) {
  left_.at(i) += delta;
  right_.at(i) += delta;
}

double initial_learning(const Categorization& a, const SchoolingConfig& cfg) {
  if (!learning_valued(cfg, school_grid(cfg))) return 0.0;
  const double lo = cfg.support().lo;
  return (posterior_mean(a, cfg.r, lo) - lo) / net_cost(cfg, lo);
}

LearningFunction build_learning(const Categorization& a, const SchoolingConfig& cfg) {
  return build_learning(a, cfg, initial_learning(a, cfg));
}

LearningFunction build_learning(const Categorization& a, const SchoolingConfig& cfg, double start) {
  std::vector<double> edges;
  for (const Pool& p : a.pools()) {
    edges.push_back(p.lo);
    edges.push_back(p.hi);
  }
  auto xs = merge_knots(school_grid(cfg), edges, cfg.support().width());
  const PosteriorFunction post(a, cfg.r);
  const std::size_t n = xs.size();
  std::vector<double> left(n);
  std::vector<double> right(n);
  left[0] = right[0] = start;
  double inv_left = 1.0 / net_cost(cfg, xs[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double x1 = xs[i + 1];
    const double d1 = net_cost(cfg, x1);
    const double inv_right = 1.0 / d1;
    if (a.pool_index(0.5 * (xs[i] + x1))) {
      left[i + 1] = right[i];
    } else {
      left[i + 1] = right[i] + 0.5 * (inv_left + inv_right) * (x1 - xs[i]);
    }
    right[i + 1] = left[i + 1] + (post(x1) - post.left_limit(x1)) / d1;
    inv_left = inv_right;
  }
  return {std::move(xs), std::move(left), std::move(right)};
}

double school_payoff(const Categorization& a, const LearningFunction& ell, const SchoolingConfig& cfg) {
  const PosteriorFunction post(a, cfg.r);
  const auto xs = ell.xs();
  const auto left = ell.left();
  const auto right = ell.right();
  auto weight = [&](double x) { return cfg.lambda - cfg.sigma * cfg.cost(x); };
  double total = 0.0;
  double w0 = weight(xs[0]);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double w1 = weight(xs[i + 1]);
    const double f0 = post(xs[i]) + w0 * right[i];
    const double f1 = post.left_limit(xs[i + 1]) + w1 * left[i + 1];
    total += 0.5 * (f0 + f1) * (cfg.f0(xs[i + 1]) - cfg.f0(xs[i]));
    w0 = w1;
  }
  return total;
}

double verify_ic(const LearningFunction& ell, const Categorization& a, const SchoolingConfig& cfg, int samples,
                 std::uint64_t seed) {
  const PosteriorFunction post(a, cfg.r);
  const auto xs = ell.xs();
  const auto right = ell.right();
  const double lo = cfg.support().lo;
  auto payoff = [&](std::size_t type, std::size_t report) {
    return post(xs[report]) + (cfg.lambda - cfg.cost(xs[type])) * right[report];
  };
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    worst = std::max(worst, lo - payoff(i, i));
    if (i > 0) {
      worst = std::max(worst, payoff(i, i - 1) - payoff(i, i));
      worst = std::max(worst, payoff(i - 1, i) - payoff(i - 1, i - 1));
    }
  }
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::uint64_t>(xs.size());
  for (int s = 0; s < samples; ++s) {
    const auto i = static_cast<std::size_t>(rng() % n);
    const auto j = static_cast<std::size_t>(rng() % n);
    worst = std::max(worst, payoff(i, j) - payoff(i, i));
  }
  return worst;
}

SchoolSolution solve_school(const SchoolingConfig& cfg, int m) {
  auto induced = induce_sender(cfg);
  auto sol = solve(induced.s, cfg.r, m);
  auto ell = build_learning(sol.categorization, cfg);
  const double payoff = school_payoff(sol.categorization, ell, cfg);
  const double v = sender_value(sol.categorization, induced.s, cfg.r) + induced.k;
  return {std::move(induced), std::move(sol), std::move(ell), payoff, v};
}

Check check_school_full_pooling(const SchoolingConfig& cfg, double tol) {
  const auto g = learning_surplus(cfg);
  double worst = *std::min_element(g.values.begin(), g.values.end());
  // The condition only implies pooling when F0 is dominated by the market prior.
  for (double x : g.xs) worst = std::min(worst, cfg.f0(x) - cfg.r(x));
  return {worst >= -tol, worst};
}

std::vector<bool> full_pooling_over_lambda(const SchoolingConfig& cfg, std::span<const double> lambdas) {
  std::vector<bool> out;
  SchoolingConfig c = cfg;
  for (double l : lambdas) {
    c.lambda = l;
    out.push_back(check_school_full_pooling(c).ok);
  }
  return out;
}

std::vector<bool> full_pooling_over_sigma(const SchoolingConfig& cfg, std::span<const double> sigmas) {
  std::vector<bool> out;
  SchoolingConfig c = cfg;
  for (double s : sigmas) {
    c.sigma = s;
    out.push_back(check_school_full_pooling(c).ok);
  }
  return out;
}

std::vector<bool> full_pooling_over_f0(const SchoolingConfig& cfg, std::span<const SenderWeighting> priors) {
  std::vector<bool> out;
  SchoolingConfig c = cfg;
  for (const auto& f : priors) {
    c.f0 = f;
    out.push_back(check_school_full_pooling(c).ok);
  }
  return out;
}

// ---------------------------------------------------------------- closed form

SenderWeighting closed_form_sender(double gamma, double lambda, int n) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be > 0");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in [0, 1)");
  if (n < 3) throw InvalidInput("knots must be >= 3");
  const auto sup = QualitySupport::make(0.0, 1.0);
  auto xs = uniform_grid(sup, n);
  std::vector<double> values(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = xs[i];
    values[i] = (std::pow(a, gamma) - lambda * a) / (1.0 - lambda * a);
  }
  values.back() = 1.0;
  return SenderWeighting::from_knots(sup, std::move(xs), std::move(values), 0.0);
}

namespace {

SweepRow sweep_cell(double gamma, double lambda, const ReceiverCdf& r, int m) {
  const auto s = closed_form_sender(gamma, lambda);
  const auto sol = solve(s, r, m);
  SweepRow row;
  row.gamma = gamma;
  row.lambda = lambda;
  row.a_tilde = first_separating_quality(sol.curve, r);
  row.full_pooling = sol.categorization.is_full_pooling();
  row.payoff = sender_value(sol.categorization, s, r);
  return row;
}

void check_sweep_args(std::span<const double> gammas, std::span<const double> lambdas) {
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidInput("gamma must be > 0");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0 && l < 1.0)) throw InvalidInput("lambda must lie in [0, 1)");
  }
}

}  // namespace

std::vector<SweepRow> censorship_threshold_sweep(std::span<const double> gammas, std::span<const double> lambdas,
                                                 int m) {
  check_sweep_args(gammas, lambdas);
  const auto r = build_receiver(FamilySpec::uniform(), QualitySupport::make(0.0, 1.0));
  const auto cols = lambdas.size();
  std::vector<SweepRow> rows(gammas.size() * cols);
  const auto cells = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < cells; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    rows[idx] = sweep_cell(gammas[idx / cols], lambdas[idx % cols], r, m);
  }
  return rows;
}

std::vector<SweepRow> reference::censorship_threshold_sweep(std::span<const double> gammas,
                                                            std::span<const double> lambdas, int m) {
  check_sweep_args(gammas, lambdas);
  const auto r = build_receiver(FamilySpec::uniform(), QualitySupport::make(0.0, 1.0));
  std::vector<SweepRow> rows;
  rows.reserve(gammas.size() * lambdas.size());
  for (double g : gammas) {
    for (double l : lambdas) rows.push_back(sweep_cell(g, l, r, m));
  }
  return rows;
}

}  // namespace monocat
