#include <benchmark/benchmark.h>

#include "dfsim/config.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/qlearn.hpp"
#include "dfsim/simulation.hpp"

using namespace dfsim;

namespace {

class NullSink final : public EventSink {
 public:
  void handle(const Event&) override {}
};

RunConfig config_for(const char* preset, const char* routing, const char* pattern, double load) {
  ConfigMap map;
  map.apply_preset(preset);
  map.set("routing", routing);
  map.set("pattern", pattern);
  map.set("load", format_double(load));
  map.set("warmup_ns", "10000");
  map.set("measure_ns", "20000");
  return resolve(map);
}

void BM_EngineScheduleAndDispatch(benchmark::State& state) {
  const auto n = state.range(0);
  NullSink sink;
  for (auto _ : state) {
    Engine engine;
    for (std::int64_t i = 0; i < n; ++i) {
      Event e;
      e.time = (i * 7919) % 100'000;
      e.kind = EventKind::kTryForward;
      engine.schedule(e);
    }
    benchmark::DoNotOptimize(engine.drain(sink));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EngineScheduleAndDispatch)->Arg(1 << 12)->Arg(1 << 16);

void BM_HystereticUpdate(benchmark::State& state) {
  RngStream rng(1, StreamTag::kSetup, 0);
  double q = 600.0;
  for (auto _ : state) {
    const double reward = 60.0 + static_cast<double>(rng.below(400));
    q = hysteretic_update(q, reward, 500.0, 0.2, 0.04);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_HystereticUpdate);

void BM_TableArgmin(benchmark::State& state) {
  const Topology topo(DragonflyParams{4, 8, 4});
  TwoLevelQTable table(topo);
  q_init(table, topo, 0, TimingParams{});
  int row = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.argmin(row));
    row = (row + 1) % table.rows();
  }
}
BENCHMARK(BM_TableArgmin);

// Simulated 30 us per iteration; items are delivered packets.
void BM_Simulate(benchmark::State& state, const char* preset, const char* routing, const char* pattern,
                 double load) {
  const RunConfig cfg = config_for(preset, routing, pattern, load);
  std::int64_t delivered = 0;
  for (auto _ : state) {
    const RunResult res = run_experiment(cfg);
    delivered += res.generated - res.inflight;
    benchmark::DoNotOptimize(res.measured.throughput);
  }
  state.SetItemsProcessed(delivered);
}
BENCHMARK_CAPTURE(BM_Simulate, desk_min_ur, "desk-72", "min", "ur", 0.8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, desk_ugaln_ur, "desk-72", "ugaln", "ur", 0.8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, desk_qadaptive_ur, "desk-72", "qadaptive", "ur", 0.8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, desk_qadaptive_adv1, "desk-72", "qadaptive", "adv:1", 0.45)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, full_qadaptive_ur, "paper-1056", "qadaptive", "ur", 0.8)
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
