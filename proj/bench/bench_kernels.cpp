// Serial reference vs OpenMP kernels. Arg is W.

#include <benchmark/benchmark.h>

#include <vector>

#include "setsize/kernels.hpp"

using namespace setsize;

namespace {

template <void (*Diag)(const FisherContext&, std::span<BoundValue>)>
void BM_JthetaDiag(benchmark::State& state) {
  const int W = static_cast<int>(state.range(0));
  const FisherContext ctx(zipf(2.0, W), 0.5);
  std::vector<BoundValue> out(static_cast<std::size_t>(W));
  for (auto _ : state) {
    Diag(ctx, out);
    benchmark::DoNotOptimize(out.data());
  }
}

kernels::EmSystem full_system(int W, double p) {
  kernels::EmSystem sys;
  sys.W = W;
  const auto d = d_pmf(zipf(2.0, W), p);
  for (int j = 1; j <= W; ++j) {
    sys.rows.push_back(j);
    sys.weights.push_back(d[static_cast<std::size_t>(j - 1)]);
    std::vector<double> row;
    for (int i = j; i <= W; ++i) row.push_back(b_entry(j, i, p));
    sys.b_row.push_back(std::move(row));
  }
  return sys;
}

template <kernels::EmStep (*Step)(const kernels::EmSystem&, std::span<const double>, std::span<double>)>
void BM_EmStep(benchmark::State& state) {
  const int W = static_cast<int>(state.range(0));
  const auto sys = full_system(W, 0.3);
  std::vector<double> phi(static_cast<std::size_t>(W), 1.0 / W), next(phi.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(Step(sys, phi, next));
    phi.swap(next);
  }
}

}  // namespace

BENCHMARK(BM_JthetaDiag<kernels::serial::jtheta_diag>)->Name("jtheta_diag/serial")->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JthetaDiag<kernels::parallel::jtheta_diag>)->Name("jtheta_diag/parallel")->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EmStep<kernels::serial::em_step>)->Name("em_step/serial")->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EmStep<kernels::parallel::em_step>)->Name("em_step/parallel")->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
