#include "nvtwin/runner.hpp"

#include <cmath>

#include "nvtwin/spinalg.hpp"

namespace nvtwin {

namespace {

bool is_rabi(const std::string& s) { return s == "rabi_electron" || s == "rabi_nuclear"; }
bool is_dd(const std::string& s) { return s == "hahn" || s == "cpmg" || s == "xy8" || s == "rxy8"; }

SweepSpec spec_of(const std::vector<double>& v) { return {v.front(), v.back(), static_cast<int>(v.size())}; }

TeleportInput parse_input(const std::string& s) {
    if (s == "+X") return TeleportInput::PlusX;
    if (s == "+Y") return TeleportInput::PlusY;
    return TeleportInput::PlusZ;
}

SweepOptions sweep_options(const ScenarioConfig& cfg, bool keep) {
    SweepOptions o;
    o.workers = cfg.workers;
    o.keep_states = keep;
    return o;
}

SweepResult branch_rows(const std::vector<TeleportationReport>& reps, bool keep) {
    SweepResult r;
    r.variable_name = "branch";
    r.names = {"c0", "c1", "probability", "fidelity"};
    for (const auto& n : r.names) r.expectations[n];
    for (const auto& t : reps) {
        r.variable.push_back(2.0 * t.c0 + t.c1);
        r.expectations["c0"].push_back(t.c0);
        r.expectations["c1"].push_back(t.c1);
        r.expectations["probability"].push_back(t.probability);
        r.expectations["fidelity"].push_back(t.fidelity);
        if (keep) r.final_states.push_back(QuantumState::density(t.bob_rho, Dims{2}));
    }
    return r;
}

void check_invariants(const QuantumState& s, double purity0, bool unitary, std::size_t i,
                      std::vector<std::string>& out) {
    Mat rho = s.as_density();
    double tr = std::abs(rho.trace() - cplx(1.0));
    double herm = hermiticity_error(rho);
    if (tr >= 1e-7) out.push_back("point " + std::to_string(i) + ": |Tr rho - 1| = " + std::to_string(tr));
    if (herm >= 1e-8) out.push_back("point " + std::to_string(i) + ": Hermiticity error " + std::to_string(herm));
    if (unitary) {
        double dp = std::abs((rho * rho).trace().real() - purity0);
        if (dp >= 1e-6) out.push_back("point " + std::to_string(i) + ": purity drift " + std::to_string(dp));
    }
}

double purity(const QuantumState& s) {
    Mat rho = s.as_density();
    return (rho * rho).trace().real();
}

}  // namespace

ConditionalGateSetup gate_setup(const ScenarioConfig& cfg) {
    if (!is_rabi(cfg.scenario)) throw ValidationError("scenario: '" + cfg.scenario + "' is not a conditional-gate run");
    const auto& q = cfg.sequence;
    GateTarget which = cfg.scenario == "rabi_electron" ? GateTarget::Electron : GateTarget::Nuclear;
    ConditionalGateSetup s = conditional_gates_setup(which, q.sweep ? q.sweep->count : 1000, true,
                                                     cfg.system.overrides(), q.w1);
    if (q.sweep) s.rabi.durations = q.sweep->values();
    if (q.f_pulse) s.rabi.f_pulse = *q.f_pulse;
    if (q.time_steps) s.rabi.time_steps = *q.time_steps;
    return s;
}

DDSetup dd_setup(const ScenarioConfig& cfg) {
    const auto& q = cfg.sequence;
    const SystemOverrides ov = cfg.system.overrides();
    DDSetup s;
    if (cfg.scenario == "hahn") s = hahn_setup(2000, ov);
    else if (cfg.scenario == "cpmg") s = cpmg_setup(q.M.value_or(16), 200, ov);
    else if (cfg.scenario == "xy8") s = xy8_setup(false, 1000, cfg.seed, ov);
    else if (cfg.scenario == "rxy8") s = xy8_setup(true, 1000, cfg.seed, ov);
    else throw ValidationError("scenario: '" + cfg.scenario + "' is not a decoupling run");
    if (q.sweep) s.dd.tau = q.sweep->values();
    if (q.M) s.dd.M = *q.M;
    if (q.t_pi) s.dd.pi_duration = *q.t_pi;
    if (q.w1) s.dd.h1 = *q.w1 * s.sys.mw_h1;
    if (q.f_pulse) s.dd.f_pulse = *q.f_pulse;
    if (q.time_steps) s.dd.time_steps = *q.time_steps;
    s.dd.validate();
    return s;
}

TeleportationPlan teleport_plan(const ScenarioConfig& cfg) {
    if (cfg.scenario != "teleportation") throw ValidationError("scenario: '" + cfg.scenario + "' is not teleportation");
    TeleportationPlan p;
    p.input = parse_input(cfg.teleportation.input.value_or("+Z"));
    p.rule_row = p.input;
    if (cfg.teleportation.c0) p.forced = std::array<int, 2>{*cfg.teleportation.c0, *cfg.teleportation.c1};
    p.seed = cfg.seed;
    p.solver = cfg.solver();
    p.validate();
    return p;
}

ScenarioConfig effective_config(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioConfig e = cfg;
    SolverOptions so = cfg.solver();
    e.atol = so.atol;
    e.rtol = so.rtol;
    auto& q = e.sequence;
    if (is_rabi(cfg.scenario)) {
        ConditionalGateSetup s = gate_setup(cfg);
        q.sweep = spec_of(s.rabi.durations);
        q.f_pulse = s.rabi.f_pulse;
        q.time_steps = s.rabi.time_steps;
    } else if (is_dd(cfg.scenario)) {
        DDSetup s = dd_setup(cfg);
        q.sweep = spec_of(s.dd.tau);
        q.M = s.dd.M;
        q.t_pi = s.dd.pi_duration;
        q.f_pulse = s.dd.f_pulse;
        q.time_steps = s.dd.time_steps;
    } else {
        auto& t = e.teleportation;
        if (!t.input) t.input = "+Z";
        if (!t.c0 && !t.mode) t.mode = "branches";
    }
    e.validate();
    return e;
}

SweepResult run_config(const ScenarioConfig& cfg) {
    const ScenarioConfig eff = effective_config(cfg);
    const SolverOptions so = eff.solver();
    const SweepOptions sw = sweep_options(eff, eff.keep_states);
    SweepResult r;
    if (is_rabi(eff.scenario)) {
        ConditionalGateSetup s = gate_setup(eff);
        r = rabi(s.sys, s.rabi, so, sw);
    } else if (is_dd(eff.scenario)) {
        r = run_dd(dd_setup(eff), so, sw);
    } else {
        TeleportationPlan p = teleport_plan(eff);
        if (p.forced || eff.teleportation.mode == std::optional<std::string>("sample"))
            r = branch_rows({scenario_teleportation(p)}, eff.keep_states);
        else
            r = branch_rows(teleportation_branches(p), eff.keep_states);
        r.meta.atol = so.atol;
        r.meta.rtol = so.rtol;
    }
    r.meta.scenario = eff.scenario;
    r.meta.seed = eff.seed;
    r.meta.config_hash = config_hash(eff);
    return r;
}

OracleReport oracle_check(const ScenarioConfig& cfg, const OracleOptions& opt) {
    const ScenarioConfig eff = effective_config(cfg);
    const SolverOptions so = eff.solver();
    OracleReport rep;
    rep.scenario = eff.scenario;
    auto record = [&](std::size_t i, double v, const QuantumState& eng, const QuantumState& ora, double p0,
                      bool unitary) {
        rep.variable.push_back(v);
        double d = trace_distance(eng.as_density(), ora.as_density());
        rep.distance.push_back(d);
        rep.max_distance = std::max(rep.max_distance, d);
        check_invariants(eng, p0, unitary, i, rep.invariant_violations);
    };

    if (eff.scenario == "teleportation") {
        TeleportationPlan p = teleport_plan(eff);
        for (int c0 : {0, 1})
            for (int c1 : {0, 1}) {
                Sequence seq = teleportation_sequence(p, c0, c1);
                QuantumState a = run(seq).final_state;
                QuantumState b = run_oracle(seq, opt);
                record(static_cast<std::size_t>(2 * c0 + c1), 2.0 * c0 + c1, a, b, purity(seq.system.rho0), true);
            }
        return rep;
    }

    const SweepOptions sw = sweep_options(eff, true);
    if (is_rabi(eff.scenario)) {
        ConditionalGateSetup s = gate_setup(eff);
        SweepResult r = rabi(s.sys, s.rabi, so, sw);
        if (!r.failures.empty()) throw SolverError("oracle-check: " + r.failures.front().message, -1, 0.0);
        const double p0 = purity(s.sys.rho0);
        for (std::size_t i = 0; i < r.variable.size(); ++i) {
            Sequence seq;
            seq.system = s.sys;
            seq.solver = so;
            if (r.variable[i] > 0) {
                PulseSegment ps;
                ps.duration = r.variable[i];
                ps.h1 = s.rabi.h1;
                ps.f_pulse = s.rabi.f_pulse;
                ps.phi_t = s.rabi.phi_t;
                ps.envelope = s.rabi.envelope;
                ps.time_steps = s.rabi.time_steps;
                seq.segments.push_back(ps);
            }
            record(i, r.variable[i], r.final_states[i], run_oracle(seq, opt), p0, s.sys.c_ops.empty());
        }
        return rep;
    }

    DDSetup s = dd_setup(eff);
    SweepResult r = run_dd(s, so, sw);
    if (!r.failures.empty()) throw SolverError("oracle-check: " + r.failures.front().message, -1, 0.0);
    const double p0 = purity(s.sys.rho0);
    for (std::size_t i = 0; i < r.variable.size(); ++i) {
        Sequence seq;
        seq.system = s.sys;
        seq.solver = so;
        seq.field = s.field;
        seq.segments = dd_schedule(s, i, r.variable[i]);
        record(i, r.variable[i], r.final_states[i], run_oracle(seq, opt), p0, s.sys.c_ops.empty());
    }
    return rep;
}

}  // namespace nvtwin
