// Serial reference loops against the OpenMP kernels.
//   bench_kernels [n ...]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <vector>

#include "rgtlps/compound.hpp"
#include "rgtlps/kernels.hpp"

using namespace rgtlps;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void row(const char* name, std::size_t n, const std::function<void(Execution)>& f) {
  const int reps = n >= 1000000 ? 3 : 20;
  const double ts = seconds([&] { f(Execution::Serial); }, reps);
  const double tp = seconds([&] { f(Execution::Parallel); }, reps);
  std::printf("%-18s %9zu %12.3f %12.3f %8.2f\n", name, n, ts * 1e3, tp * 1e3, ts / tp);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> sizes{10000, 100000, 1000000};
  if (argc > 1) {
    sizes.clear();
    for (int i = 1; i < argc; ++i) sizes.push_back(std::strtoull(argv[i], nullptr, 10));
  }
  const CompoundModel model(RgtlParams(1.4, 0.9), PsFamily::geometric(), 0.9);
  std::printf("threads %d\n", omp_get_max_threads());
  std::printf("%-18s %9s %12s %12s %8s\n", "kernel", "n", "serial_ms", "parallel_ms", "speedup");
  int mismatches = 0;
  for (std::size_t n : sizes) {
    Rng rng(7);
    const std::vector<double> y = compound_sample_inverse(model, n, rng);
    std::vector<double> u(n), out(n), out2(n);
    for (double& v : u) v = rng.uniform();

    row("loglik value", n, [&](Execution e) { (void)likelihood_sums(model, y, Order::Value, e); });
    row("loglik hessian", n, [&](Execution e) { (void)likelihood_sums(model, y, Order::Hessian, e); });
    row("e-step", n, [&](Execution e) { expected_latent(model, y, out, e); });
    row("m-step sums", n, [&](Execution e) { (void)complete_data_sums(1.4, y, out, e); });
    row("quantile map", n, [&](Execution e) { map_quantiles(model, u, out2, e); });

    const LikelihoodSums a = likelihood_sums(model, y, Order::Hessian, Execution::Serial);
    const LikelihoodSums b = likelihood_sums(model, y, Order::Hessian, Execution::Parallel);
    if (std::memcmp(&a, &b, sizeof a) != 0) ++mismatches;
  }
  std::printf("serial/parallel bitwise mismatches: %d\n", mismatches);
  return mismatches == 0 ? 0 : 1;
}
