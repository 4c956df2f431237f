// Serial reference kernels against the OpenMP row-parallel versions.

#include <benchmark/benchmark.h>

#include "deepsum/dcov.hpp"
#include "deepsum/rng.hpp"

using namespace deepsum;

namespace {

Matrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) { return Rng(seed).normal_matrix(n, d); }

template <auto Fn>
void run(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix z = gaussian(n, 5, 1);
    const Matrix y = gaussian(n, 1, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(z, y));
    state.SetComplexityN(state.range(0));
}

void args(benchmark::internal::Benchmark* b) {
    for (int n : {128, 512, 2048}) b->Arg(n);
    b->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNSquared);
}

}  // namespace

BENCHMARK(run<&serial::dcov_v>)->Name("dcov_v/serial")->Apply(args);
BENCHMARK(run<static_cast<DcovValue (*)(const Matrix&, const Matrix&)>(&dcov_v)>)->Name("dcov_v/omp")->Apply(args);
BENCHMARK(run<&serial::dcov_u>)->Name("dcov_u/serial")->Apply(args);
BENCHMARK(run<static_cast<DcovValue (*)(const Matrix&, const Matrix&)>(&dcov_u)>)->Name("dcov_u/omp")->Apply(args);
BENCHMARK(run<&serial::dcov_grad>)->Name("dcov_grad/serial")->Apply(args);
BENCHMARK(run<static_cast<Matrix (*)(const Matrix&, const Matrix&)>(&dcov_grad)>)->Name("dcov_grad/omp")->Apply(args);

BENCHMARK_MAIN();
