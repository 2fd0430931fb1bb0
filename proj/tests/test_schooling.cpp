#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace monocat;

namespace {

const auto unit = QualitySupport::make(0.0, 1.0);

SchoolingConfig party_school() {
  return {build_sender(FamilySpec::uniform(), unit), build_receiver(FamilySpec::uniform(), unit),
          ScalarFunction::poly({2.0, -1.0}), 0.0, 1.0};
}

SchoolingConfig truncated(double gamma, double lambda) {
  const auto sup = QualitySupport::make(1e-3, 1.0);
  return {build_sender(FamilySpec::power(gamma), sup), build_receiver(FamilySpec::uniform(), sup),
          ScalarFunction::inverse(1.0), lambda, 0.0};
}

double closed_form(double gamma, double lambda, double a) {
  return (std::pow(a, gamma) - lambda * a) / (1.0 - lambda * a);
}

}  // namespace

TEST_CASE("induced sender weighting") {
  SUBCASE("no surplus gives F0") {
    auto cfg = party_school();
    cfg.sigma = 0.0;
    cfg.f0 = build_sender(FamilySpec::power(1.7), unit);
    const auto ind = induce_sender(cfg);
    for (double a = 0.0; a <= 1.0; a += 0.05) CHECK(ind.s(a) == doctest::Approx(cfg.f0(a)).epsilon(1e-12));
    CHECK(ind.k == 0.0);
  }
  SUBCASE("closed form") {
    for (int n : {1001, 3001}) {
      const auto s = closed_form_sender(0.5, 0.5, n);
      for (double a = 0.05; a < 1.0; a += 0.05) CHECK(s(a) == doctest::Approx(closed_form(0.5, 0.5, a)).epsilon(1e-3));
      CHECK(s(1.0) == 1.0);
    }
  }
  SUBCASE("truncated cost reproduces the closed form") {
    for (auto [gamma, tol] : {std::pair{0.5, 1e-2}, std::pair{1.0, 2e-3}}) {
      for (double lambda : {0.3, 0.8}) {
        const auto ind = induce_sender(truncated(gamma, lambda));
        CHECK(ind.intrinsic);
        for (double a = 0.01; a <= 1.0; a += 0.01) CHECK(std::abs(ind.s(a) - closed_form(gamma, lambda, a)) <= tol);
      }
    }
  }
  SUBCASE("party school jump") {
    const auto ind = induce_sender(party_school());
    CHECK_FALSE(ind.intrinsic);
    CHECK(ind.k == 0.0);
    CHECK(ind.s.value_at_lo() == 0.0);
    CHECK(ind.s.right_limit_at_lo() == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(check_school_full_pooling(party_school()).ok);
  }
}

TEST_CASE("condition C") {
  auto cfg = party_school();
  cfg.lambda = 1.0;
  CHECK_THROWS_AS(induce_sender(cfg), NumericFailure);
  cfg = party_school();
  cfg.cost = ScalarFunction::poly({1.0, 0.5});
  CHECK_THROWS_AS(induce_sender(cfg), NumericFailure);
  cfg = party_school();
  cfg.sigma = 1.5;
  CHECK_THROWS_AS(induce_sender(cfg), InvalidInput);
  cfg = party_school();
  cfg.lambda = -0.1;
  CHECK_THROWS_AS(induce_sender(cfg), InvalidInput);
}

TEST_CASE("induced weighting properties") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto cfg = testkit::random_school(seed);
    const auto ind = induce_sender(cfg);
    CHECK(ind.s(cfg.support().hi) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ind.s.jump_at_lo() >= 0.0);
    if (ind.intrinsic) CHECK(ind.s.jump_at_lo() == doctest::Approx(0.0));
    const auto vals = ind.s.values();
    const auto xs = ind.s.xs();
    double worst = 0.0;
    for (std::size_t i = 1; i < vals.size(); ++i) {
      worst = std::max(worst, std::abs(vals[i] - vals[i - 1]) / std::max(xs[i] - xs[i - 1], 1e-300) *
                                  (xs[i] - xs[i - 1]));
    }
    CHECK(worst <= 0.1);
  }
}

TEST_CASE("learning function") {
  SUBCASE("full pooling is flat") {
    const auto cfg = party_school();
    const auto ell = build_learning(Categorization::full_pooling(cfg.r), cfg, 0.3);
    for (double a = 0.0; a < 1.0; a += 0.1) CHECK(ell(a) == doctest::Approx(0.3));
  }
  SUBCASE("full separation has constant slope") {
    auto cfg = party_school();
    cfg.cost = ScalarFunction::poly({2.0, -1e-9});
    cfg.lambda = 1.0;
    cfg.sigma = 0.0;
    const auto ell = build_learning(Categorization::full_separation(cfg.r), cfg, 0.2);
    for (double a = 0.0; a <= 1.0; a += 0.1) CHECK(ell(a) == doctest::Approx(0.2 + a).epsilon(1e-6));
    CHECK(ell.jumps(1e-9).empty());
  }
  SUBCASE("jump between adjacent pools") {
    const auto cfg = party_school();
    const auto a = Categorization::make(cfg.r, {{0.0, 0.4}, {0.4, 0.8}});
    const auto ell = build_learning(a, cfg, 0.0);
    const auto jumps = ell.jumps(1e-9);
    REQUIRE(jumps.size() == 2);
    CHECK(jumps[0].at == doctest::Approx(0.4));
    CHECK(jumps[0].size == doctest::Approx((0.6 - 0.2) / (2.0 - 0.4)).epsilon(1e-9));
    CHECK(jumps[1].at == doctest::Approx(0.8));
    CHECK(jumps[1].size == doctest::Approx((0.8 - 0.6) / (2.0 - 0.8)).epsilon(1e-9));
    CHECK(ell(0.5) == doctest::Approx(0.25));
  }
}

TEST_CASE("learning is nondecreasing with jumps only at pool edges") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto cfg = testkit::random_school(seed);
    const auto a = random_categorization(cfg.r, seed, 4);
    const auto ell = build_learning(a, cfg);
    const auto left = ell.left();
    const auto right = ell.right();
    for (std::size_t i = 0; i < right.size(); ++i) {
      CHECK(right[i] >= left[i] - 1e-12);
      if (i > 0) CHECK(left[i] >= right[i - 1] - 1e-12);
    }
    const PosteriorFunction post(a, cfg.r);
    for (const auto& j : ell.jumps(1e-9)) {
      bool on_edge = false;
      for (const auto& p : a.pools()) on_edge |= j.at == p.lo || j.at == p.hi;
      CHECK(on_edge);
      const double expected = (post(j.at) - post.left_limit(j.at)) / (cfg.cost(j.at) - cfg.lambda);
      CHECK(std::abs(j.size - expected) <= 1e-9);
    }
  }
}

TEST_CASE("payoff identity") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto cfg = testkit::random_school(seed);
    const auto ind = induce_sender(cfg);
    for (int t = 0; t < 20; ++t) {
      const auto a = random_categorization(cfg.r, seed * 100 + t, 4);
      const double lhs = school_payoff(a, build_learning(a, cfg), cfg);
      const double rhs = sender_value(a, ind.s, cfg.r) + ind.k;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("solving schools") {
  SUBCASE("party school pools everything") {
    const auto cfg = party_school();
    const auto sol = solve_school(cfg);
    CHECK(sol.solution.categorization.is_full_pooling());
    CHECK(sol.learning.at_lo() == 0.0);
    CHECK(sol.payoff == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(verify_ic(sol.learning, sol.solution.categorization, cfg, 1000) <= kTolIc);
  }
  SUBCASE("zero value of learning pools everything") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto cfg = testkit::random_school(seed);
      cfg.lambda = 0.0;
      CHECK(check_school_full_pooling(cfg).ok);
      const auto sol = solve_school(cfg);
      const double pooled = sender_value(Categorization::full_pooling(cfg.r), sol.induced.s, cfg.r);
      CHECK(std::abs(sender_value(sol.solution.categorization, sol.induced.s, cfg.r) - pooled) <= 1e-6);
    }
  }
  SUBCASE("solutions are incentive compatible") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto cfg = testkit::random_school(seed);
      const auto sol = solve_school(cfg);
      CHECK(verify_ic(sol.learning, sol.solution.categorization, cfg, 2000, seed) <= kTolIc);
      CHECK(std::abs(sol.payoff - sol.value_plus_k) <= 1e-5);
    }
  }
  SUBCASE("truncated closed form") {
    const auto cfg = truncated(0.5, 0.8);
    const auto sol = solve_school(cfg);
    CHECK_FALSE(check_school_full_pooling(cfg).ok);
    CHECK(verify_ic(sol.learning, sol.solution.categorization, cfg, 10000) <= kTolIc);
    CHECK(std::abs(sol.payoff - sol.value_plus_k) <= 1e-5);
  }
}

TEST_CASE("perturbed learning breaks incentive compatibility") {
  const auto cfg = truncated(0.5, 0.8);
  const auto sol = solve_school(cfg);
  auto ell = sol.learning;
  const auto xs = ell.xs();
  std::size_t i = xs.size() - 2;
  REQUIRE_FALSE(sol.solution.categorization.pool_index(xs[i]).has_value());
  ell.perturb(i, 0.1);
  CHECK(verify_ic(ell, sol.solution.categorization, cfg, 1000) > 1e-3);
}

TEST_CASE("full pooling condition") {
  SUBCASE("sufficient for full pooling") {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const auto cfg = testkit::random_school(seed);
      if (!check_school_full_pooling(cfg).ok) continue;
      ++hits;
      const auto sol = solve_school(cfg);
      const double pooled = sender_value(Categorization::full_pooling(cfg.r), sol.induced.s, cfg.r);
      CHECK(std::abs(sender_value(sol.solution.categorization, sol.induced.s, cfg.r) - pooled) <= 1e-6);
    }
    CHECK(hits > 0);
  }
  SUBCASE("monotone in lambda, sigma and F0") {
    const auto cfg = truncated(0.5, 0.0);
    const std::vector<double> lambdas{0.0, 0.2, 0.4, 0.6, 0.8};
    const auto by_lambda = full_pooling_over_lambda(cfg, lambdas);
    CHECK(by_lambda.front());
    for (std::size_t i = 1; i < by_lambda.size(); ++i) CHECK((by_lambda[i - 1] || !by_lambda[i]));

    auto base = truncated(0.5, 0.8);
    const std::vector<double> sigmas{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto by_sigma = full_pooling_over_sigma(base, sigmas);
    CHECK(by_sigma.back());
    for (std::size_t i = 1; i < by_sigma.size(); ++i) CHECK((!by_sigma[i - 1] || by_sigma[i]));

    const auto sup = base.support();
    base.sigma = 0.6;
    const std::vector<SenderWeighting> priors{build_sender(FamilySpec::power(0.3), sup),
                                              build_sender(FamilySpec::power(1.0), sup),
                                              build_sender(FamilySpec::power(3.0), sup)};
    const auto by_f0 = full_pooling_over_f0(base, priors);
    for (std::size_t i = 1; i < by_f0.size(); ++i) CHECK((!by_f0[i - 1] || by_f0[i]));
  }
}

TEST_CASE("censorship threshold sweep") {
  const std::vector<double> gammas{0.3, 0.5, 0.7, 1.0};
  const std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const auto rows = censorship_threshold_sweep(gammas, lambdas);
  REQUIRE(rows.size() == gammas.size() * lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    for (std::size_t g = 1; g < gammas.size(); ++g) {
      CHECK(rows[g * lambdas.size() + j].a_tilde <= rows[(g - 1) * lambdas.size() + j].a_tilde + 1e-3);
    }
  }
  for (const auto& row : rows) CHECK(row.full_pooling == (row.a_tilde == 1.0));
  // Separation grows with lambda at first, then shrinks again.
  const auto at = [&](double g, double l) {
    for (const auto& row : rows) {
      if (row.gamma == g && std::abs(row.lambda - l) < 1e-12) return row.a_tilde;
    }
    return -1.0;
  };
  CHECK(at(0.5, 0.8) < at(0.5, 0.6));
  CHECK(at(0.5, 0.9) > at(0.5, 0.8));
  CHECK(at(0.7, 0.9) > at(0.7, 0.7));
  for (double l : lambdas) CHECK(at(1.0, l) == 0.0);
}
