// Benchmark comparing the serial reference paths against the OpenMP kernels:
// trial generation, per-record psi evaluation, and permutation resampling.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "trialbounds/estimator.hpp"
#include "trialbounds/falsification.hpp"
#include "trialbounds/sim.hpp"

using namespace trialbounds;

namespace {

double seconds_of(const std::function<void()>& work, int repeats = 3) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    work();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel) {
  std::printf("%-28s %10.4fs %10.4fs %8.2fx\n", name.c_str(), serial,
              parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 2'000'000;
  if (argc > 1) n = static_cast<std::size_t>(std::stoull(argv[1]));

#ifdef _OPENMP
  std::printf("OpenMP threads: %d, records: %zu\n", omp_get_max_threads(), n);
#else
  std::printf("OpenMP unavailable (serial build), records: %zu\n", n);
#endif
  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  const sim::DgpSpec dgp = sim::DgpSpec::make(sim::DgpVariant::kPaper);

  const double gen_serial = seconds_of([&] {
    sim::reference::simulate_trial(n, 42, dgp);
  });
  const double gen_parallel =
      seconds_of([&] { sim::simulate_trial(n, 42, dgp); });
  row("simulate_trial", gen_serial, gen_parallel);

  const sim::SimOutput out = sim::simulate_trial(n, 42, dgp);
  EvaluationPolicy pi_e;
  pi_e.id = "pi_e0";
  const auto map = sim::standard_action_map("pi_e0");
  pi_e.action_by_x.assign(map.begin(), map.end());
  pi_e.performance = sim::true_accuracy(map);

  const double psi_serial = seconds_of([&] {
    reference::psi_values(out.dataset, pi_e);
  });
  const double psi_parallel =
      seconds_of([&] { psi_values(out.dataset, pi_e); });
  row("psi_values", psi_serial, psi_parallel);

  // permutation test on a slice of the data; the resample loop carries the
  // parallelism, so compare 1 thread against the full pool
  const sim::SimOutput small = sim::simulate_trial(20000, 7, dgp);
  FalsifyOptions options;
  options.method = TestMethod::kPermutation;
  options.seed = 11;
  options.permutations = 20000;
#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const double perm_serial = seconds_of([&] {
    test_neutral_action(small.dataset, "pi0", "pi1", 0.05, options);
  }, 1);
  omp_set_num_threads(max_threads);
#else
  const double perm_serial = seconds_of([&] {
    test_neutral_action(small.dataset, "pi0", "pi1", 0.05, options);
  }, 1);
#endif
  const double perm_parallel = seconds_of([&] {
    test_neutral_action(small.dataset, "pi0", "pi1", 0.05, options);
  }, 1);
  row("permutation_test", perm_serial, perm_parallel);

  return 0;
}
