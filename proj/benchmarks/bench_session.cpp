#include <dblind/analysis.hpp>
#include <dblind/protocol.hpp>

#include <benchmark/benchmark.h>

using namespace dblind;

static void MeasurePulse(benchmark::State& state) {
  const DetectorStation station(PolarizationAngle(0.3));
  std::uint64_t i = 0;
  for (auto _ : state) {
    RoundRng rng(1, i++);
    const Pulse p{Intensity(2.0), sample_lambda(rng)};
    benchmark::DoNotOptimize(measure_pulse(p, station));
  }
}
BENCHMARK(MeasurePulse);

static void RunSession(benchmark::State& state) {
  ScenarioConfig s;
  s.kind = static_cast<ScenarioKind>(state.range(0));
  const auto proto = s.kind == ScenarioKind::SingleBlinding ? ProtocolKind::BBM92 : ProtocolKind::Ekert;
  const auto p = ProtocolConfig::defaults(proto, 100000, 42);
  const auto workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    auto rec = run_session(p, s, workers);
    benchmark::DoNotOptimize(rec.rounds.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.rounds));
}
BENCHMARK(RunSession)
    ->ArgsProduct({{0, 1, 2, 3}, {1, 4}})
    ->ArgNames({"scenario", "workers"})
    ->UseRealTime()
    ->Unit(benchmark::kMillisecond);

static void Analyse(benchmark::State& state) {
  ScenarioConfig s;
  s.kind = ScenarioKind::DoubleBlindEkert;
  const auto rec = run_session(ProtocolConfig::defaults(ProtocolKind::Ekert, 100000, 42), s, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chsh_estimate(rec.rounds, ChshQuadruple::defaults()));
    benchmark::DoNotOptimize(estimate_efficiencies(rec.rounds, rec.size()));
    benchmark::DoNotOptimize(fair_sampling_monitor(rec.rounds));
  }
}
BENCHMARK(Analyse)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
