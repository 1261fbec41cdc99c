#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "rtfs/calibration.hpp"
#include "rtfs/contingency.hpp"
#include "rtfs/freq_sim.hpp"
#include "rtfs/inertia.hpp"

namespace {

void BM_SimulateReferenceFleet(benchmark::State& state)
{
    const auto snap = fixtures::reference_fleet();
    const auto scenario = rtfs::build_scenario(snap, rtfs::largest_mw_unit(snap));
    rtfs::SimulationConfig cfg;
    cfg.time_step = static_cast<double>(state.range(0)) / 1000.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rtfs::simulate(scenario, cfg, 2516.4));
    }
}
BENCHMARK(BM_SimulateReferenceFleet)->Arg(10)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_SimulateFleetSize(benchmark::State& state)
{
    const auto snap = fixtures::random_fleet(static_cast<unsigned>(state.range(0)));
    const auto scenario = rtfs::build_scenario(snap, rtfs::largest_mw_unit(snap));
    for (auto _ : state) {
        benchmark::DoNotOptimize(rtfs::simulate(scenario, {}, 2516.4));
    }
    state.counters["units"] = static_cast<double>(snap.units.size());
}
BENCHMARK(BM_SimulateFleetSize)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_FitUnitLag(benchmark::State& state)
{
    const auto trace = fixtures::synthetic_unit_trace(0.9, 4.0, 0.01, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rtfs::fit_unit_lag(trace));
    }
}
BENCHMARK(BM_FitUnitLag)->Unit(benchmark::kMillisecond);

void BM_EstimateInertia(benchmark::State& state)
{
    const auto sim = rtfs::simulate(fixtures::bare_scenario(-244.0, 11500.0, 1900.0, 2.0), {}, 2516.4);
    rtfs::DisturbanceRecord rec;
    rec.event_id = "bench";
    rec.frequency = fixtures::padded_trace(sim.frequency, 50.0, 3.0);
    rec.onset_time = 3.0;
    rec.delta_p = 244.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rtfs::estimate_system_inertia(rec, 50.0));
    }
}
BENCHMARK(BM_EstimateInertia)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
