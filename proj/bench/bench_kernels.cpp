// Serial reference kernels against their OpenMP versions.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "monocat/reference.hpp"
#include "monocat/schooling.hpp"

using namespace monocat;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s %12.3f %12.3f %8.2fx\n", name, serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  const auto sup = QualitySupport::make(0.0, 1.0);
  const auto r = build_receiver(FamilySpec::mixture({{0.5, FamilySpec::logistic(0.3, 0.1)}, {0.5, FamilySpec::power(2.5)}}), sup);
  const auto s = build_sender(FamilySpec::reverse_logistic(0.05, 1.5), sup);

  std::vector<Categorization> cats;
  for (int i = 0; i < 2000; ++i) cats.push_back(random_categorization(r, i, 5));
  const auto sol = solve(s, r, 2001);
  std::vector<double> grid(sol.curve.points());
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = r.inverse(sol.curve.z[k]);
  const std::vector<double> gammas{0.3, 0.5, 0.7, 1.0};
  const std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  std::printf("threads %d, best of %d\n", omp_get_max_threads(), reps);
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial ms", "openmp ms", "speedup");
  row("compose_h m=200001", best_of(reps, [&] { reference::compose_h(s, r, 200001); }),
      best_of(reps, [&] { compose_h(s, r, 200001); }));
  row("dp_oracle n=800", best_of(reps, [&] { reference::dp_oracle(s, r, 800); }),
      best_of(reps, [&] { dp_oracle(s, r, 800); }));
  row("sender_values x2000", best_of(reps, [&] { reference::sender_values(cats, s, r); }),
      best_of(reps, [&] { sender_values(cats, s, r); }));
  row("psi margin x2000", best_of(reps, [&] { reference::psi_dominance_margin(sol.categorization, cats, s, r, grid); }),
      best_of(reps, [&] { psi_dominance_margin(sol.categorization, cats, s, r, grid); }));
  row("sweep 4x9", best_of(reps, [&] { reference::censorship_threshold_sweep(gammas, lambdas); }),
      best_of(reps, [&] { censorship_threshold_sweep(gammas, lambdas); }));
  return 0;
}
