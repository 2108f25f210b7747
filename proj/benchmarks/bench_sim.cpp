#include <benchmark/benchmark.h>

#include "train/simulator.hpp"

using namespace train;

namespace {

void run_one(benchmark::State& state, TopologyKind kind, Variant v) {
  Scenario s;
  s.variant = v;
  s.topology = {kind, static_cast<std::uint32_t>(state.range(0)), 2};
  s.timing.t_slack = 5000;
  s.chain_m = 8;
  for (auto _ : state) benchmark::DoNotOptimize(run(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

static void BM_StarA(benchmark::State& state) { run_one(state, TopologyKind::Star, Variant::A); }
BENCHMARK(BM_StarA)->RangeMultiplier(10)->Range(10, 100000)->Unit(benchmark::kMillisecond);

static void BM_TreeA(benchmark::State& state) { run_one(state, TopologyKind::Tree, Variant::A); }
BENCHMARK(BM_TreeA)->RangeMultiplier(10)->Range(10, 100000)->Unit(benchmark::kMillisecond);

static void BM_LineB(benchmark::State& state) { run_one(state, TopologyKind::Line, Variant::B); }
BENCHMARK(BM_LineB)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMillisecond);
