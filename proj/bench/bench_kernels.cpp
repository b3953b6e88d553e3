// Serial vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare scaling.

#include <benchmark/benchmark.h>

#include "ajc/galerkin.hpp"
#include "ajc/jumpchain.hpp"
#include "ajc/presets.hpp"

namespace {

using namespace ajc;

const RateMatrixSequence& triple_well_fine() {
  static const auto seq = presets::triple_well(64);
  return seq;
}

void BM_AssembleSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(serial::assemble(triple_well_fine()));
}

void BM_AssembleParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(assemble(triple_well_fine()));
}

SpaceTimeVector ramp(const JumpMatrix& j) {
  SpaceTimeVector f(j.indexer(), VectorKind::density);
  for (std::size_t a = 0; a < f.values.size(); ++a) f.values[a] = 1.0 / static_cast<double>(a + 1);
  return f;
}

void BM_ForwardSerial(benchmark::State& state) {
  const auto j = assemble(triple_well_fine());
  const auto f = ramp(j);
  for (auto _ : state) benchmark::DoNotOptimize(serial::apply_forward(j, f));
}

void BM_ForwardParallel(benchmark::State& state) {
  const auto j = assemble(triple_well_fine());
  const auto f = ramp(j);
  for (auto _ : state) benchmark::DoNotOptimize(apply_forward(j, f));
}

void BM_FirstJumpSerial(benchmark::State& state) {
  const auto seq = presets::two_state();
  for (auto _ : state) benchmark::DoNotOptimize(serial::first_jump_counts(seq, 0, 0, 100000, 7));
}

void BM_FirstJumpParallel(benchmark::State& state) {
  const auto seq = presets::two_state();
  for (auto _ : state) benchmark::DoNotOptimize(first_jump_counts(seq, 0, 0, 100000, 7));
}

}  // namespace

BENCHMARK(BM_AssembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ForwardParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FirstJumpSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FirstJumpParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
