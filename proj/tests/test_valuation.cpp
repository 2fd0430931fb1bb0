#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace monocat;

namespace {

const auto unit = QualitySupport::make(0.0, 1.0);

testkit::Instance intro(double eps) {
  return {build_sender(FamilySpec::uniform_interval(0.75 - eps, 0.75 + eps), unit),
          build_receiver(FamilySpec::uniform(), unit)};
}

std::vector<Categorization> random_batch(const ReceiverCdf& r, int count, std::uint64_t seed) {
  std::vector<Categorization> out;
  for (int i = 0; i < count; ++i) out.push_back(random_categorization(r, seed * 1000 + i, 4));
  return out;
}

}  // namespace

TEST_CASE("posterior means") {
  const auto r = build_receiver(FamilySpec::uniform(), unit);
  SUBCASE("full pooling") {
    const auto a = Categorization::full_pooling(r);
    for (double x = 0.0; x < 1.0; x += 0.1) CHECK(posterior_mean(a, r, x) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(posterior_mean(a, r, 1.0) == 1.0);
  }
  SUBCASE("introductory two-pool scheme") {
    const PosteriorFunction a(Categorization::make(r, {{0.0, 0.7}, {0.7, 1.0}}), r);
    CHECK(a(0.2) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(a(0.7) == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(a.left_limit(0.7) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(a(0.99) == doctest::Approx(0.85).epsilon(1e-12));
  }
  SUBCASE("separation is the identity") {
    const auto a = Categorization::full_separation(r);
    for (double x = 0.0; x <= 1.0; x += 0.1) CHECK(posterior_mean(a, r, x) == x);
  }
  SUBCASE("pool means sit inside their pools") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto inst = testkit::random_cdf_instance(seed);
      const PosteriorFunction a(random_categorization(inst.r, seed, 5), inst.r);
      for (std::size_t i = 0; i < a.pool_means().size(); ++i) {
        CHECK(a.pool_means()[i] > a.categorization().pools()[i].lo);
        CHECK(a.pool_means()[i] < a.categorization().pools()[i].hi);
      }
    }
  }
}

TEST_CASE("posterior is nondecreasing and right-continuous") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = testkit::random_cdf_instance(seed);
    const PosteriorFunction a(random_categorization(inst.r, seed + 7, 5), inst.r);
    double prev = a(0.0);
    for (int k = 1; k <= 2000; ++k) {
      const double v = a(k / 2000.0);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    for (const auto& p : a.categorization().pools()) CHECK(a(p.lo) == a(p.lo + 1e-12 * (p.hi - p.lo)));
  }
}

TEST_CASE("weighting psi") {
  SUBCASE("separation gives S") {
    const auto [s, r] = testkit::random_cdf_instance(3);
    const auto a = Categorization::full_separation(r);
    for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(psi_value(a, s, r, x) == doctest::Approx(s(x)).epsilon(1e-12));
  }
  SUBCASE("full pooling with equal priors gives R") {
    const auto r = build_receiver(FamilySpec::logistic(0.4, 0.15), unit);
    const auto s = SenderWeighting::from_receiver(r);
    const auto a = Categorization::full_pooling(r);
    for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(std::abs(psi_value(a, s, r, x) - r(x)) <= 1e-12);
  }
  SUBCASE("introductory pool") {
    const auto [s, r] = intro(0.05);
    const auto a = Categorization::make(r, {{0.7, 1.0}});
    CHECK(psi_value(a, s, r, 0.85) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("endpoint values") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto [s, r] = testkit::random_cdf_instance(seed);
      const auto psi = weighting_psi(random_categorization(r, seed, 3), s, r);
      CHECK(psi.values.front() == doctest::Approx(s.value_at_lo()).epsilon(1e-12));
      CHECK(psi.values.back() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("sender value on the introductory instance") {
  const auto [s, r] = intro(0.05);
  const auto check_all = [&](const Categorization& a, double expected) {
    const auto v = sender_value_routes(a, s, r);
    CHECK(v.direct == doctest::Approx(expected).epsilon(1e-9));
    CHECK(v.psi == doctest::Approx(expected).epsilon(1e-9));
    CHECK(v.ibp == doctest::Approx(expected).epsilon(1e-9));
  };
  check_all(Categorization::full_pooling(r), 0.5);
  check_all(Categorization::make(r, {{0.0, 0.7}, {0.7, 1.0}}), 0.85);
  check_all(Categorization::full_separation(r), 0.75);
  CHECK(sender_value(Categorization::make(r, {{0.7, 1.0}}), s, r, ValueMethod::ibp) ==
        doctest::Approx(0.85).epsilon(1e-9));
}

TEST_CASE("value routes agree") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto [s, r] = testkit::random_cdf_instance(seed);
    for (const auto& a : random_batch(r, 10, seed)) CHECK(sender_value_routes(a, s, r).max_disagreement() <= kTolVal);
  }
}

TEST_CASE("equal priors make every categorization neutral") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = testkit::random_cdf_instance(seed).r;
    const auto s = SenderWeighting::from_receiver(r);
    const double mean = sender_value(Categorization::full_separation(r), s, r);
    for (const auto& a : random_batch(r, 20, seed)) CHECK(std::abs(sender_value(a, s, r) - mean) <= kTolVal);
  }
}

TEST_CASE("the solver's categorization dominates random ones") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto [s, r] = testkit::random_cdf_instance(seed);
    const auto sol = solve(s, r, 2001);
    const auto others = random_batch(r, 60, seed);
    const auto grid = testkit::quality_grid(sol.curve, r);
    CHECK(psi_dominance_margin(sol.categorization, others, s, r, grid) >= -kTolEnv);
    const double best = sender_value(sol.categorization, s, r);
    for (double v : sender_values(others, s, r)) CHECK(best >= v - kTolVal);
  }
}

TEST_CASE("batched values match single evaluations") {
  const auto [s, r] = testkit::random_cdf_instance(5);
  const auto cats = random_batch(r, 30, 5);
  const auto values = sender_values(cats, s, r);
  REQUIRE(values.size() == cats.size());
  for (std::size_t i = 0; i < cats.size(); ++i) CHECK(values[i] == sender_value(cats[i], s, r));
}

TEST_CASE("dynamic programming oracle") {
  SUBCASE("equal priors") {
    const auto r = build_receiver(FamilySpec::power(1.5), unit);
    const auto res = dp_oracle(SenderWeighting::from_receiver(r), r, 300);
    CHECK(res.value == doctest::Approx(0.6).epsilon(2e-3));
  }
  SUBCASE("introductory instance") {
    const auto [s, r] = intro(0.05);
    const auto res = dp_oracle(s, r, 400);
    CHECK(std::abs(res.value - 0.85) <= 2e-3);
    REQUIRE(res.categorization.pools().size() == 1);
    CHECK(res.categorization.pools()[0].lo == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(res.categorization.pools()[0].hi == 1.0);
  }
  SUBCASE("concave curve pools fully") {
    const auto r = build_receiver(FamilySpec::power(2.0), unit);
    const auto s = build_sender(FamilySpec::uniform(), unit);
    const auto res = dp_oracle(s, r, 400);
    CHECK(std::abs(res.value - 2.0 / 3.0) <= 2e-3);
    CHECK(res.categorization.is_full_pooling());
  }
  SUBCASE("grid limits") {
    const auto [s, r] = intro(0.05);
    CHECK_THROWS_AS(dp_oracle(s, r, 801), InvalidInput);
    CHECK_THROWS_AS(dp_oracle(s, r, 0), InvalidInput);
    CHECK_NOTHROW(dp_oracle(s, r, 900, 1000));
  }
}

TEST_CASE("oracle agrees with the solver") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto [s, r] = testkit::random_instance(seed);
    const int n = 200;
    const double v = sender_value(solve(s, r, 2001).categorization, s, r);
    CHECK(std::abs(dp_oracle(s, r, n).value - v) <= 5.0 / n);
  }
}

TEST_CASE("random categorizations") {
  const auto r = build_receiver(FamilySpec::power(2.0), unit);
  CHECK(random_categorization(r, 9, 0).is_full_separation());
  const auto a = random_categorization(r, 42, 6);
  const auto b = random_categorization(r, 42, 6);
  CHECK(a.pools() == b.pools());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto c = random_categorization(r, seed, 6);
    CHECK(c.pools().size() <= 6);
    for (std::size_t i = 0; i < c.pools().size(); ++i) {
      const auto& p = c.percentile_pools()[i];
      CHECK(p.lo < p.hi);
      CHECK(std::abs(p.lo * 2000 - std::round(p.lo * 2000)) <= 1e-6);
      if (i > 0) CHECK(c.pools()[i - 1].hi <= c.pools()[i].lo);
    }
  }
}

TEST_CASE("value routes on a support away from zero") {
  const auto sup = QualitySupport::make(1.0, 2.0);
  const auto r = build_receiver(FamilySpec::uniform(), sup);
  const auto s = SenderWeighting::from_receiver(r);
  const auto v = sender_value_routes(Categorization::full_separation(r), s, r);
  CHECK(v.direct == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v.psi == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v.ibp == doctest::Approx(1.5).epsilon(1e-12));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = testkit::random_school(seed);
    const auto ind = induce_sender(cfg);
    for (int i = 0; i < 10; ++i) {
      const auto a = random_categorization(cfg.r, seed * 31 + i, 4);
      CHECK(sender_value_routes(a, ind.s, cfg.r).max_disagreement() <= kTolVal);
    }
  }
}
