#include <benchmark/benchmark.h>
#include <omp.h>

#include "nvtwin/scenarios.hpp"

using namespace nvtwin;

namespace {

struct RabiWork {
    QuantumSystem sys;
    PulseSegment pulse;
    std::vector<double> durations;

    explicit RabiWork(int points) {
        NVParams p;
        p.B0 = 200.0;
        sys = build_nv(p);
        pulse.h1 = 20.0 * sys.mw_h1;
        pulse.f_pulse = transition_frequency(sys, {"0"}, {"-1"});
        durations = linspace(0.005, 0.15, points);
    }

    PointFn fn() const {
        return [this](std::size_t, double d) {
            PulseSegment s = pulse;
            s.duration = d;
            EvolveResult r = evolve_pulse(sys.rho0, sys.H0, s, {}, nullptr, 0.0);
            PointResult out;
            out.values = {expectation(r.state, sys.observables.at("fluorescence"))};
            out.stats = r.stats;
            return out;
        };
    }
};

void BM_SweepSerial(benchmark::State& state) {
    RabiWork w(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(w.durations, {"fluorescence"}, w.fn(), {}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepOpenMP(benchmark::State& state) {
    RabiWork w(static_cast<int>(state.range(0)));
    SweepOptions opt;
    opt.workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sweep_engine(w.durations, {"fluorescence"}, w.fn(), opt));
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["workers"] = static_cast<double>(opt.workers);
}

void worker_args(benchmark::internal::Benchmark* b) {
    const int hw = omp_get_num_procs();
    for (int w = 1; w <= std::max(1, hw); w *= 2) b->Args({64, w});
    if ((hw & (hw - 1)) != 0) b->Args({64, hw});
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepOpenMP)->Apply(worker_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
