#include <chrono>
#include <cmath>
#include <optional>

#include <omp.h>

#include "nvtwin/sequences.hpp"

namespace nvtwin {

namespace {

void check_values(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("sweep: empty value array");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("sweep: non-finite sweep value");
}

struct Slot {
    std::optional<PointResult> ok;
    std::optional<SweepFailure> fail;
};

Slot evaluate(const PointFn& fn, std::size_t i, double v) {
    Slot s;
    try {
        s.ok = fn(i, v);
    } catch (const SolverError& e) {
        s.fail = SweepFailure{i, e.what(), true};
    } catch (const std::exception& e) {
        s.fail = SweepFailure{i, e.what(), false};
    }
    return s;
}

SweepResult assemble(const std::vector<double>& values, const std::vector<std::string>& names, std::vector<Slot>& slots,
                     const SweepOptions& opt) {
    SweepResult r;
    r.variable = values;
    r.names = names;
    for (const auto& n : names) r.expectations[n].assign(values.size(), std::nan(""));
    if (opt.keep_states) r.final_states.resize(values.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].fail) {
            r.failures.push_back(*slots[i].fail);
            continue;
        }
        PointResult& p = *slots[i].ok;
        if (p.values.size() != names.size()) {
            r.failures.push_back({i, "point returned the wrong number of values", false});
            continue;
        }
        for (std::size_t k = 0; k < names.size(); ++k) r.expectations[names[k]][i] = p.values[k];
        if (opt.keep_states && p.final_state) r.final_states[i] = std::move(*p.final_state);
        r.meta.steps += p.stats;
        if (r.meta.segment_steps.size() < p.segment_stats.size()) r.meta.segment_steps.resize(p.segment_stats.size());
        for (std::size_t k = 0; k < p.segment_stats.size(); ++k) r.meta.segment_steps[k] += p.segment_stats[k];
        for (auto& w : p.warnings) r.meta.warnings.push_back("point " + std::to_string(i) + ": " + w);
    }
    return r;
}

}  // namespace

SweepResult sweep_serial(const std::vector<double>& values, const std::vector<std::string>& names, const PointFn& fn,
                         const SweepOptions& opt) {
    check_values(values);
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Slot> slots(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) slots[i] = evaluate(fn, i, values[i]);
    SweepResult r = assemble(values, names, slots, opt);
    r.meta.workers = 1;
    r.meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

SweepResult sweep_engine(const std::vector<double>& values, const std::vector<std::string>& names, const PointFn& fn,
                         const SweepOptions& opt) {
    check_values(values);
    auto t0 = std::chrono::steady_clock::now();
    const int workers = opt.workers > 0 ? opt.workers : omp_get_max_threads();
    std::vector<Slot> slots(values.size());
    const long n = static_cast<long>(values.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long i = 0; i < n; ++i) slots[i] = evaluate(fn, static_cast<std::size_t>(i), values[i]);
    SweepResult r = assemble(values, names, slots, opt);
    r.meta.workers = workers;
    r.meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace nvtwin
