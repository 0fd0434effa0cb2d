#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nvtwin/control.hpp"
#include "nvtwin/oracle.hpp"
#include "nvtwin/propagator.hpp"
#include "nvtwin/system.hpp"

namespace nvtwin {

struct MeasureSegment {
    Operator projector;
    MeasureMode mode;
    bool terminal = false;  // no further segments allowed after a sampled terminal measurement
};

using Segment = std::variant<PulseSegment, FreeSegment, MeasureSegment>;

double segment_duration(const Segment& s);
std::vector<double> linspace(double a, double b, int n);
double total_duration(const std::vector<Segment>& segs);

struct Sequence {
    QuantumSystem system;
    std::vector<Segment> segments;
    std::optional<ClassicalField> field;  // active during pulses and free evolutions
    std::vector<std::string> record;      // observable names; empty = all
    SolverOptions solver;
    bool dense = false;  // sample observables on each pulse's time_steps grid
    double t0 = 0.0;
};

struct SequenceResult {
    QuantumState final_state;
    double t_end = 0.0;
    std::vector<MeasureOutcome> outcomes;
    std::vector<Sample> samples;
    std::vector<StepStats> segment_stats;
    std::vector<std::string> warnings;
};

// Observable names to record, in output order.
std::vector<std::string> record_names(const QuantumSystem& sys, const std::vector<std::string>& record);

SequenceResult run(const Sequence& seq);
// Same schedule through the piecewise-exponential oracle.
QuantumState run_oracle(const Sequence& seq, const OracleOptions& opt = {});

// Runs `segs` on an existing engine state; shared by the sequence runner, sweeps and the builder.
struct ScheduleContext {
    const Engine* engine;
    const ClassicalField* field = nullptr;
    const std::vector<Mat>* record = nullptr;  // eigenbasis observables for dense sampling
    bool dense = false;
};
double run_segments(const ScheduleContext& ctx, Engine::State& s, const std::vector<Segment>& segs, double t,
                    SequenceResult& out, int index_offset = 0);

// Step-by-step construction. Immediate mode advances the stored state on every append;
// deferred mode only collects segments for run().
class SequenceBuilder {
public:
    explicit SequenceBuilder(QuantumSystem sys, bool immediate = true, SolverOptions opt = {});

    void set_field(std::optional<ClassicalField> f);
    void add_pulse(const PulseSegment& p);
    void add_free(const FreeSegment& f);
    void add_free(double duration) { add_free(FreeSegment{duration, std::nullopt}); }
    // Returns the outcome in immediate mode; deferred mode returns a default outcome.
    MeasureOutcome add_measure(const Operator& projector, const MeasureMode& mode, bool terminal = false);
    void reset();

    QuantumState state() const;
    double time() const { return t_; }
    const std::vector<Segment>& segments() const { return segs_; }
    const QuantumSystem& system() const { return sys_; }
    Sequence sequence() const;
    SequenceResult run() const;

private:
    void check_open() const;
    template <class S>
    void append(const S& seg);

    QuantumSystem sys_;
    bool immediate_;
    SolverOptions opt_;
    std::optional<ClassicalField> field_;
    std::vector<Segment> segs_;
    std::shared_ptr<Engine> engine_;
    Engine::State state_;
    double t_ = 0.0;
    bool closed_ = false;
    SequenceResult acc_;
};

// ---- sweeps ----

struct SweepMetadata {
    std::string scenario;
    std::string config_hash;
    std::uint64_t seed = 0;
    double atol = 0, rtol = 0;
    double wall_time = 0;  // s
    int workers = 1;
    StepStats steps;
    std::vector<StepStats> segment_steps;  // summed over points by segment index
    std::vector<std::string> warnings;
};

struct SweepFailure {
    std::size_t index;
    std::string message;
    bool solver = false;
};

struct SweepResult {
    std::string variable_name = "variable";
    std::vector<double> variable;
    std::vector<std::string> names;  // column order
    std::map<std::string, std::vector<double>> expectations;
    std::vector<QuantumState> final_states;  // only when requested
    std::vector<SweepFailure> failures;
    SweepMetadata meta;
};

struct PointResult {
    std::vector<double> values;  // one per name
    std::optional<QuantumState> final_state;
    StepStats stats;
    std::vector<StepStats> segment_stats;
    std::vector<std::string> warnings;
};

using PointFn = std::function<PointResult(std::size_t index, double value)>;

struct SweepOptions {
    int workers = 0;  // 0 = OpenMP default
    bool keep_states = false;
};

// Points evaluated concurrently, stored by index. Failures are collected, never rethrown.
SweepResult sweep_engine(const std::vector<double>& values, const std::vector<std::string>& names, const PointFn& fn,
                         const SweepOptions& opt);
// Plain loop, the reference for sweep_engine.
SweepResult sweep_serial(const std::vector<double>& values, const std::vector<std::string>& names, const PointFn& fn,
                         const SweepOptions& opt);

// Each point runs make(i, value) from rho0 on one shared engine.
using ScheduleFn = std::function<std::vector<Segment>(std::size_t index, double value)>;
SweepResult sweep_schedule(const QuantumSystem& sys, const std::vector<double>& values, const ScheduleFn& make,
                           const std::optional<ClassicalField>& field, const SolverOptions& solver,
                           const SweepOptions& opt, const std::vector<std::string>& record = {});

// ---- predefined experiments ----

struct RabiParams {
    std::vector<double> durations;  // ascending, >= 0
    Operator h1;
    double f_pulse = 0;
    double phi_t = 0;
    EnvelopeSpec envelope;
    int time_steps = 1000;
    // Square envelopes: one integration with stops at every duration instead of one run per point.
    bool single_trajectory = true;
};

SweepResult rabi(const QuantumSystem& sys, const RabiParams& p, const SolverOptions& solver = {},
                 const SweepOptions& opt = {}, const std::optional<ClassicalField>& field = std::nullopt);

struct DDParams {
    std::vector<double> tau;  // us
    double pi_duration = 0;   // us
    int M = 1;
    double f_pulse = 0;
    Operator h1;
    bool projection_pulse = true;
    int time_steps = 1000;
    double phi0 = 0;

    void validate() const;
};

// Hahn: pi/2 - free(tau - tp/2) - pi - free(tau - tp/2) - pi/2.
std::vector<Segment> hahn_schedule(const DDParams& dd, double tau);
// CPMG: M pi pulses spaced tau centre to centre, edges tau/2.
std::vector<Segment> cpmg_schedule(const DDParams& dd, double tau);
// XY8-M; block_phases[b] is added to every pulse of block b (zeros for plain XY8).
std::vector<Segment> xy8_schedule(const DDParams& dd, double tau, const std::vector<double>& block_phases);
std::vector<double> rxy8_phases(std::uint64_t seed, std::size_t point, int blocks);

SweepResult hahn(const QuantumSystem& sys, const DDParams& dd, const SolverOptions& solver = {},
                 const SweepOptions& opt = {}, const std::optional<ClassicalField>& field = std::nullopt);
SweepResult cpmg(const QuantumSystem& sys, const DDParams& dd, const SolverOptions& solver = {},
                 const SweepOptions& opt = {}, const std::optional<ClassicalField>& field = std::nullopt);
SweepResult xy8(const QuantumSystem& sys, const DDParams& dd, bool randomize, std::uint64_t seed,
                const SolverOptions& solver = {}, const SweepOptions& opt = {},
                const std::optional<ClassicalField>& field = std::nullopt);

}  // namespace nvtwin
