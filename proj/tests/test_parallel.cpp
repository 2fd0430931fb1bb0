#include <doctest.h>

#include <omp.h>

#include "monocat/reference.hpp"
#include "support.hpp"

using namespace monocat;

namespace {

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("percentile curve matches the serial kernel") {
  const Threads t(4);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto [s, r] = testkit::random_cdf_instance(seed);
    const auto a = compose_h(s, r, 2001);
    const auto b = reference::compose_h(s, r, 2001);
    CHECK(a.z == b.z);
    CHECK(a.h == b.h);
  }
}

TEST_CASE("oracle matches the serial kernel") {
  const Threads t(4);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto [s, r] = testkit::random_instance(seed);
    const auto a = dp_oracle(s, r, 300);
    const auto b = reference::dp_oracle(s, r, 300);
    CHECK(a.value == b.value);
    CHECK(a.categorization.pools() == b.categorization.pools());
  }
}

TEST_CASE("batched values and dominance margin match the serial kernels") {
  const Threads t(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [s, r] = testkit::random_cdf_instance(seed);
    std::vector<Categorization> cats;
    for (int i = 0; i < 64; ++i) cats.push_back(random_categorization(r, seed * 100 + i, 4));
    CHECK(sender_values(cats, s, r) == reference::sender_values(cats, s, r));
    const auto sol = solve(s, r, 2001);
    const auto grid = testkit::quality_grid(sol.curve, r);
    CHECK(psi_dominance_margin(sol.categorization, cats, s, r, grid) ==
          reference::psi_dominance_margin(sol.categorization, cats, s, r, grid));
  }
}

TEST_CASE("sweep matches the serial kernel") {
  const Threads t(4);
  const std::vector<double> gammas{0.3, 0.7, 1.0};
  const std::vector<double> lambdas{0.2, 0.5, 0.8};
  const auto a = censorship_threshold_sweep(gammas, lambdas, 1001);
  const auto b = reference::censorship_threshold_sweep(gammas, lambdas, 1001);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gamma == b[i].gamma);
    CHECK(a[i].lambda == b[i].lambda);
    CHECK(a[i].a_tilde == b[i].a_tilde);
    CHECK(a[i].full_pooling == b[i].full_pooling);
    CHECK(a[i].payoff == b[i].payoff);
  }
}
