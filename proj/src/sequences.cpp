#include "nvtwin/sequences.hpp"

#include <chrono>
#include <cmath>

#include "nvtwin/seeds.hpp"

namespace nvtwin {

double segment_duration(const Segment& s) {
    if (auto p = std::get_if<PulseSegment>(&s)) return p->duration;
    if (auto f = std::get_if<FreeSegment>(&s)) return f->duration;
    return 0.0;
}

double total_duration(const std::vector<Segment>& segs) {
    double t = 0;
    for (const auto& s : segs) t += segment_duration(s);
    return t;
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw ValidationError("linspace needs at least one point");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    if (n > 1) v.back() = b;
    return v;
}

std::vector<std::string> record_names(const QuantumSystem& sys, const std::vector<std::string>& record) {
    if (record.empty()) {
        std::vector<std::string> all;
        for (const auto& [k, _] : sys.observables) all.push_back(k);
        return all;
    }
    for (const auto& r : record)
        if (!sys.observables.count(r)) throw ValidationError("unknown observable '" + r + "'");
    return record;
}

namespace {

std::vector<Mat> eigen_observables(const Engine& eng, const QuantumSystem& sys, const std::vector<std::string>& names) {
    std::vector<Mat> out;
    for (const auto& n : names) out.push_back(eng.to_eigen(sys.observables.at(n).data));
    return out;
}

void check_positivity(const Engine& eng, const Engine::State& s, int seg, std::vector<std::string>& warnings) {
    if (s.factored) return;
    double m = eng.min_eigenvalue(s);
    if (m < -1e-6) warnings.push_back("segment " + std::to_string(seg) + ": density min eigenvalue " + std::to_string(m));
}

}  // namespace

double run_segments(const ScheduleContext& ctx, Engine::State& s, const std::vector<Segment>& segs, double t,
                    SequenceResult& out, int index_offset) {
    const Engine& eng = *ctx.engine;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        int idx = index_offset + static_cast<int>(i);
        StepStats st;
        if (auto p = std::get_if<PulseSegment>(&segs[i])) {
            bool d = ctx.dense && ctx.record && !ctx.record->empty();
            st = eng.pulse(s, *p, ctx.field, t, d ? ctx.record : nullptr, d ? &out.samples : nullptr, idx);
            t += p->duration;
        } else if (auto f = std::get_if<FreeSegment>(&segs[i])) {
            const ClassicalField* fld = f->classical_field ? &*f->classical_field : ctx.field;
            st = eng.free(s, f->duration, fld, t, idx);
            t += f->duration;
        } else {
            const auto& m = std::get<MeasureSegment>(segs[i]);
            if (m.projector.n() != eng.dims().total()) throw ValidationError("projector dims do not match system");
            out.outcomes.push_back(eng.measure(s, eng.to_eigen(m.projector.data), m.mode));
        }
        out.segment_stats.push_back(st);
        check_positivity(eng, s, idx, out.warnings);
    }
    return t;
}

SequenceResult run(const Sequence& seq) {
    const QuantumSystem& sys = seq.system;
    if (seq.field) seq.field->validate();
    Engine eng(sys.H0, sys.c_ops, seq.solver);
    Engine::State st = eng.load(sys.rho0);
    auto names = record_names(sys, seq.record);
    auto rec = eigen_observables(eng, sys, names);
    ScheduleContext ctx{&eng, seq.field ? &*seq.field : nullptr, &rec, seq.dense};
    SequenceResult out;
    out.t_end = run_segments(ctx, st, seq.segments, seq.t0, out);
    out.final_state = eng.unload(st);
    return out;
}

QuantumState run_oracle(const Sequence& seq, const OracleOptions& opt) {
    const QuantumSystem& sys = seq.system;
    QuantumState s = sys.rho0;
    double t = seq.t0;
    const ClassicalField* field = seq.field ? &*seq.field : nullptr;
    for (const auto& seg : seq.segments) {
        if (auto p = std::get_if<PulseSegment>(&seg)) {
            s = oracle_pulse(s, sys.H0, *p, sys.c_ops, field, t, opt);
            t += p->duration;
        } else if (auto f = std::get_if<FreeSegment>(&seg)) {
            s = oracle_free(s, sys.H0, f->duration, sys.c_ops, f->classical_field ? &*f->classical_field : field, t, opt);
            t += f->duration;
        } else {
            const auto& m = std::get<MeasureSegment>(seg);
            s = measure(s, m.projector, m.mode).post_state;
        }
    }
    return s;
}

// ---- builder ----

SequenceBuilder::SequenceBuilder(QuantumSystem sys, bool immediate, SolverOptions opt)
    : sys_(std::move(sys)), immediate_(immediate), opt_(opt) {
    opt_.validate();
    if (immediate_) {
        engine_ = std::make_shared<Engine>(sys_.H0, sys_.c_ops, opt_);
        state_ = engine_->load(sys_.rho0);
    }
}

void SequenceBuilder::set_field(std::optional<ClassicalField> f) {
    if (f) f->validate();
    field_ = std::move(f);
}

void SequenceBuilder::check_open() const {
    if (closed_) throw ValidationError("sequence ended with a sampled terminal measurement; call reset() first");
}

template <class S>
void SequenceBuilder::append(const S& seg) {
    check_open();
    segs_.push_back(seg);
    if (!immediate_) return;
    ScheduleContext ctx{engine_.get(), field_ ? &*field_ : nullptr, nullptr, false};
    t_ = run_segments(ctx, state_, {seg}, t_, acc_, static_cast<int>(segs_.size()) - 1);
}

void SequenceBuilder::add_pulse(const PulseSegment& p) {
    p.validate();
    if (!(p.h1.dims == sys_.dims)) throw ValidationError("pulse h1 dims do not match system");
    append(p);
    if (!immediate_) t_ += p.duration;
}

void SequenceBuilder::add_free(const FreeSegment& f) {
    if (!(f.duration >= 0)) throw ValidationError("free evolution duration must be >= 0");
    append(f);
    if (!immediate_) t_ += f.duration;
}

MeasureOutcome SequenceBuilder::add_measure(const Operator& projector, const MeasureMode& mode, bool terminal) {
    if (projector.n() != sys_.dims.total()) throw ValidationError("projector dims do not match system");
    append(MeasureSegment{projector, mode, terminal});
    if (terminal && mode.kind == MeasureMode::Kind::Sample) closed_ = true;
    return immediate_ ? acc_.outcomes.back() : MeasureOutcome{};
}

void SequenceBuilder::reset() {
    segs_.clear();
    acc_ = {};
    t_ = 0;
    closed_ = false;
    if (immediate_) state_ = engine_->load(sys_.rho0);
}

QuantumState SequenceBuilder::state() const { return immediate_ ? engine_->unload(state_) : run().final_state; }

Sequence SequenceBuilder::sequence() const {
    Sequence s;
    s.system = sys_;
    s.segments = segs_;
    s.field = field_;
    s.solver = opt_;
    return s;
}

SequenceResult SequenceBuilder::run() const {
    if (!immediate_) return nvtwin::run(sequence());
    SequenceResult r = acc_;
    r.final_state = engine_->unload(state_);
    r.t_end = t_;
    return r;
}

// ---- sweeps over schedules ----

SweepResult sweep_schedule(const QuantumSystem& sys, const std::vector<double>& values, const ScheduleFn& make,
                           const std::optional<ClassicalField>& field, const SolverOptions& solver,
                           const SweepOptions& opt, const std::vector<std::string>& record) {
    if (field) field->validate();
    auto eng = std::make_shared<const Engine>(sys.H0, sys.c_ops, solver);
    auto names = record_names(sys, record);
    auto rec = eigen_observables(*eng, sys, names);
    const ClassicalField* fptr = field ? &*field : nullptr;
    PointFn fn = [&](std::size_t i, double v) {
        Engine::State st = eng->load(sys.rho0);
        SequenceResult tmp;
        ScheduleContext ctx{eng.get(), fptr, nullptr, false};
        run_segments(ctx, st, make(i, v), 0.0, tmp);
        PointResult pr;
        for (const auto& o : rec) pr.values.push_back(eng->expect(st, o));
        if (opt.keep_states) pr.final_state = eng->unload(st);
        for (const auto& s : tmp.segment_stats) pr.stats += s;
        pr.segment_stats = std::move(tmp.segment_stats);
        pr.warnings = std::move(tmp.warnings);
        return pr;
    };
    SweepResult r = sweep_engine(values, names, fn, opt);
    r.meta.atol = solver.atol;
    r.meta.rtol = solver.rtol;
    return r;
}

SweepResult rabi(const QuantumSystem& sys, const RabiParams& p, const SolverOptions& solver, const SweepOptions& opt,
                 const std::optional<ClassicalField>& field) {
    if (p.durations.empty()) throw ValidationError("rabi: empty duration array");
    for (std::size_t i = 0; i < p.durations.size(); ++i) {
        if (!(p.durations[i] >= 0) || !std::isfinite(p.durations[i])) throw ValidationError("rabi: durations must be >= 0");
        if (i > 0 && p.durations[i] < p.durations[i - 1]) throw ValidationError("rabi: durations must be ascending");
    }
    if (!(p.h1.dims == sys.dims)) throw ValidationError("rabi: h1 dims do not match system");
    auto make_pulse = [&](double d) {
        PulseSegment s;
        s.duration = d;
        s.h1 = p.h1;
        s.envelope = p.envelope;
        s.f_pulse = p.f_pulse;
        s.phi_t = p.phi_t;
        s.time_steps = p.time_steps;
        return s;
    };
    if (!(p.single_trajectory && p.envelope.kind == EnvelopeSpec::Kind::Square)) {
        SweepResult r = sweep_schedule(
            sys, p.durations,
            [&](std::size_t, double d) {
                return d > 0 ? std::vector<Segment>{make_pulse(d)} : std::vector<Segment>{};
            },
            field, solver, opt);
        r.variable_name = "pulse_duration";
        return r;
    }

    auto t_wall = std::chrono::steady_clock::now();
    if (field) field->validate();
    Engine eng(sys.H0, sys.c_ops, solver);
    auto names = record_names(sys, {});
    auto rec = eigen_observables(eng, sys, names);
    SweepResult r;
    r.variable_name = "pulse_duration";
    r.variable = p.durations;
    r.names = names;
    for (const auto& n : names) r.expectations[n].assign(p.durations.size(), 0.0);
    if (opt.keep_states) r.final_states.resize(p.durations.size());
    Engine::State st = eng.load(sys.rho0);
    auto store = [&](std::size_t i, const Engine::State& s) {
        for (std::size_t k = 0; k < names.size(); ++k) r.expectations[names[k]][i] = eng.expect(s, rec[k]);
        if (opt.keep_states) r.final_states[i] = eng.unload(s);
        check_positivity(eng, s, 0, r.meta.warnings);
    };
    std::size_t first = 0;
    while (first < p.durations.size() && p.durations[first] == 0.0) store(first++, st);
    // repeated durations share one stop
    std::vector<double> stops;
    std::vector<std::size_t> owner;
    for (std::size_t i = first; i < p.durations.size(); ++i) {
        if (stops.empty() || p.durations[i] > stops.back()) stops.push_back(p.durations[i]);
        owner.push_back(stops.size() - 1);
    }
    if (!stops.empty()) {
        PulseSegment seg = make_pulse(stops.back());
        try {
            r.meta.steps = eng.pulse_trajectory(
                st, seg, field ? &*field : nullptr, 0.0, stops,
                [&](std::size_t k, const Engine::State& s) {
                    for (std::size_t i = first; i < p.durations.size(); ++i)
                        if (owner[i - first] == k) store(i, s);
                },
                0);
            r.meta.segment_steps = {r.meta.steps};
        } catch (const SolverError& e) {
            for (std::size_t i = first; i < p.durations.size(); ++i) {
                r.failures.push_back({i, e.what(), true});
                for (const auto& n : names) r.expectations[n][i] = std::nan("");
            }
        }
    }
    r.meta.atol = solver.atol;
    r.meta.rtol = solver.rtol;
    r.meta.workers = 1;
    r.meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall).count();
    return r;
}

// ---- dynamical decoupling ----

void DDParams::validate() const {
    if (tau.empty()) throw ValidationError("DD: empty tau array");
    if (!(pi_duration > 0)) throw ValidationError("DD: pi_pulse_duration must be > 0");
    if (M < 1) throw ValidationError("DD: M must be >= 1");
    if (time_steps < 2) throw ValidationError("DD: time_steps must be >= 2");
    if (!h1.is_hermitian(1e-10)) throw ValidationError("DD: h1 must be Hermitian");
    for (double t : tau)
        if (!(t > pi_duration) || !std::isfinite(t))
            throw ValidationError("DD: every tau must exceed the pi pulse duration (tau=" + std::to_string(t) + ")");
}

namespace {

PulseSegment dd_pulse(const DDParams& dd, double duration, double phase) {
    PulseSegment s;
    s.duration = duration;
    s.h1 = dd.h1;
    s.f_pulse = dd.f_pulse;
    s.phi_t = phase;
    s.time_steps = dd.time_steps;
    return s;
}

FreeSegment gap(double d) {
    if (d < 0) throw ValidationError("DD: tau too short for the pulse subtraction");
    return FreeSegment{d, std::nullopt};
}

}  // namespace

std::vector<Segment> hahn_schedule(const DDParams& dd, double tau) {
    const double tp = dd.pi_duration, half = tp / 2, p0 = dd.phi0;
    std::vector<Segment> s{dd_pulse(dd, half, p0 + kPi / 2), gap(tau - half), dd_pulse(dd, tp, p0), gap(tau - half)};
    if (dd.projection_pulse) s.push_back(dd_pulse(dd, half, p0 + 3 * kPi / 2));
    return s;
}

std::vector<Segment> cpmg_schedule(const DDParams& dd, double tau) {
    const double tp = dd.pi_duration, half = tp / 2, p0 = dd.phi0;
    std::vector<Segment> s{dd_pulse(dd, half, p0 + kPi / 2), gap(tau / 2 - half)};
    for (int k = 0; k < dd.M; ++k) {
        s.push_back(dd_pulse(dd, tp, p0));
        s.push_back(gap(k + 1 < dd.M ? tau - tp : tau / 2 - half));
    }
    if (dd.projection_pulse) s.push_back(dd_pulse(dd, half, p0 + 3 * kPi / 2));
    return s;
}

std::vector<Segment> xy8_schedule(const DDParams& dd, double tau, const std::vector<double>& block_phases) {
    static constexpr double kPattern[8] = {0, kPi / 2, 0, kPi / 2, kPi / 2, 0, kPi / 2, 0};  // X Y X Y Y X Y X
    if (static_cast<int>(block_phases.size()) != dd.M) throw ValidationError("XY8: need one phase per block");
    const double tp = dd.pi_duration, half = tp / 2, p0 = dd.phi0;
    std::vector<Segment> s{dd_pulse(dd, half, p0), gap(tau / 2 - half)};
    const int n = 8 * dd.M;
    for (int k = 0; k < n; ++k) {
        s.push_back(dd_pulse(dd, tp, p0 + kPattern[k % 8] + block_phases[k / 8]));
        s.push_back(gap(k + 1 < n ? tau - tp : tau / 2 - half));
    }
    if (dd.projection_pulse) s.push_back(dd_pulse(dd, half, p0 + kPi));
    return s;
}

std::vector<double> rxy8_phases(std::uint64_t seed, std::size_t point, int blocks) {
    std::uint64_t x = derive_seed(seed, "rxy8", point);
    std::vector<double> out;
    for (int b = 0; b < blocks; ++b) {
        x = splitmix64(x);
        out.push_back(kTwoPi * static_cast<double>(x >> 11) * 0x1.0p-53);
    }
    return out;
}

SweepResult hahn(const QuantumSystem& sys, const DDParams& dd, const SolverOptions& solver, const SweepOptions& opt,
                 const std::optional<ClassicalField>& field) {
    dd.validate();
    SweepResult r = sweep_schedule(sys, dd.tau, [&](std::size_t, double t) { return hahn_schedule(dd, t); }, field,
                                   solver, opt);
    r.variable_name = "tau";
    return r;
}

SweepResult cpmg(const QuantumSystem& sys, const DDParams& dd, const SolverOptions& solver, const SweepOptions& opt,
                 const std::optional<ClassicalField>& field) {
    dd.validate();
    SweepResult r = sweep_schedule(sys, dd.tau, [&](std::size_t, double t) { return cpmg_schedule(dd, t); }, field,
                                   solver, opt);
    r.variable_name = "tau";
    return r;
}

SweepResult xy8(const QuantumSystem& sys, const DDParams& dd, bool randomize, std::uint64_t seed,
                const SolverOptions& solver, const SweepOptions& opt, const std::optional<ClassicalField>& field) {
    dd.validate();
    SweepResult r = sweep_schedule(
        sys, dd.tau,
        [&](std::size_t i, double t) {
            return xy8_schedule(dd, t, randomize ? rxy8_phases(seed, i, dd.M) : std::vector<double>(dd.M, 0.0));
        },
        field, solver, opt);
    r.variable_name = "tau";
    r.meta.seed = randomize ? seed : 0;
    return r;
}

}  // namespace nvtwin
