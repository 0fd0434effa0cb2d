#include "nvtwin/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <omp.h>

#include "nvtwin/seeds.hpp"

namespace nvtwin {

std::vector<std::string> scenario_ids() {
    return {"rabi_electron", "rabi_nuclear", "hahn", "cpmg", "xy8", "rxy8", "teleportation"};
}

namespace {

constexpr double kDeg = kPi / 180.0;

Operator single(const Mat& m) { return Operator(m, Dims{static_cast<int>(m.rows())}); }

Mat ket_bra(int n, int k) {
    Mat m = Mat::Zero(n, n);
    m(k, k) = 1.0;
    return m;
}

QuantumSystem with_carbon(const QuantumSystem& nv, const Eigen::Matrix3d& A, const Eigen::Vector3d& B) {
    Operator h2 = hyperfine_h2(A, 0.5, B, constants::gamma_c13, nv.dims);
    return add_spin(nv, h2, 2);
}

}  // namespace

void SystemOverrides::apply(NVParams& p) const {
    if (B0) p.B0 = *B0;
    if (theta) p.theta = *theta;
    if (isotope) p.isotope = *isotope;
    if (n0) p.n0 = *n0;
    if (temperature) p.temperature = *temperature;
    p.validate();
}

// ---- conditional gates ----

QuantumSystem conditional_gates_system(const SystemOverrides& ov) {
    if (ov.isotope && *ov.isotope != Isotope::None)
        throw ValidationError("system.isotope: the conditional-gate scenarios model the NV without nitrogen");
    NVParams p;
    p.B0 = 200.0;
    ov.apply(p);
    QuantumSystem nv = build_nv(p);
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    A(2, 2) = -130.0;
    QuantumSystem sys = with_carbon(nv, A, p.field());
    sys.observables["carbon_up"] = embed(single(ket_bra(2, 0)), 1, sys.dims);
    return sys;
}

ConditionalGateSetup conditional_gates_setup(GateTarget which, int points, bool dissipation,
                                             const SystemOverrides& ov, std::optional<double> w1) {
    if (points < 2) throw ValidationError("conditional gates: need at least 2 sweep points");
    ConditionalGateSetup s;
    QuantumSystem sys = conditional_gates_system(ov);
    SpinOps S = spin_matrices(1.0), I = spin_matrices(0.5);
    // joint drive: both carriers' operators present in one h1
    const double we = which == GateTarget::Electron && w1 ? *w1 : 20.0;
    const double wn = which == GateTarget::Nuclear && w1 ? *w1 : 0.8;
    if (!(we > 0.0) || !(wn > 0.0)) throw ValidationError("sequence.w1 must be > 0");
    Operator h1 = we * tensor(std::sqrt(2.0) * S.x, identity(2)) + wn * tensor(identity(3), 2.0 * I.x);
    h1.dims = sys.dims;
    RabiParams r;
    r.h1 = h1;
    r.time_steps = 1000;
    if (which == GateTarget::Electron) {
        sys = set_initial_state(sys, QuantumState::ket(product_ket(sys, {"0", "-1/2"}), sys.dims));
        r.f_pulse = transition_frequency(sys, {"0", "-1/2"}, {"-1", "-1/2"});
        r.durations = linspace(0.0, 0.15, points);
    } else {
        sys = set_initial_state(sys, QuantumState::ket(product_ket(sys, {"-1", "+1/2"}), sys.dims));
        r.f_pulse = transition_frequency(sys, {"-1", "+1/2"}, {"-1", "-1/2"});
        r.durations = linspace(0.0, 2.5, points);
        if (dissipation) sys.c_ops.push_back({embed(I.z, 1, sys.dims), 0.5});
    }
    s.sys = std::move(sys);
    s.rabi = std::move(r);
    return s;
}

SweepResult scenario_conditional_gates(GateTarget which, int points, bool dissipation, const SolverOptions& solver,
                                       const SweepOptions& sweep) {
    ConditionalGateSetup s = conditional_gates_setup(which, points, dissipation);
    SweepResult r = rabi(s.sys, s.rabi, solver, sweep);
    r.meta.scenario = which == GateTarget::Electron ? "rabi_electron" : "rabi_nuclear";
    return r;
}

// ---- dynamical decoupling ----

DDSetup hahn_setup(int points, const SystemOverrides& ov) {
    NVParams p;
    p.B0 = 4.2;
    p.theta = -45.0 * kDeg;
    p.isotope = Isotope::N14;
    p.temperature = 300.0;
    ov.apply(p);
    QuantumSystem nv = build_nv(p);
    Eigen::Matrix3d A;
    A << 5.0, -6.3, -2.9, -6.3, 4.2, -2.3, -2.9, -2.3, 8.2;
    DDSetup s;
    s.kind = DDKind::Hahn;
    s.sys = with_carbon(nv, A, p.field());
    const double w1 = 15.0;
    s.dd.tau = linspace(0.04, 4.0, points);
    s.dd.pi_duration = 0.0316;
    s.dd.M = 1;
    s.dd.f_pulse = s.sys.mw_freqs.at(1);  // m_S = 0 <-> +1, averaged over nuclear sublevels
    s.dd.h1 = w1 * s.sys.mw_h1;
    s.dd.time_steps = 1000;
    return s;
}

DDSetup cpmg_setup(int M, int points, const SystemOverrides& ov) {
    NVParams p;
    p.B0 = 40.1;
    p.isotope = Isotope::N14;
    ov.apply(p);
    QuantumSystem nv = build_nv(p);
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    A(0, 2) = A(2, 0) = 0.044;
    A(2, 2) = 0.032;
    DDSetup s;
    s.kind = DDKind::CPMG;
    s.sys = with_carbon(nv, A, p.field());
    s.dd.pi_duration = 0.01;
    const double w1 = 1.0 / (2.0 * s.dd.pi_duration);
    s.dd.tau = linspace(16.74, 16.85, points);
    s.dd.M = M;
    s.dd.f_pulse = s.sys.mw_freqs.at(0);
    s.dd.h1 = w1 * s.sys.mw_h1;
    s.dd.time_steps = 1000;
    return s;
}

DDSetup xy8_setup(bool randomize, int points, std::uint64_t seed, const SystemOverrides& ov) {
    NVParams p;
    p.B0 = 40.0;
    p.isotope = Isotope::N15;
    ov.apply(p);
    DDSetup s;
    s.kind = randomize ? DDKind::RXY8 : DDKind::XY8;
    s.sys = build_nv(p);
    const double w1 = 20.0;
    s.dd.tau = linspace(0.06, 0.17, points);
    s.dd.pi_duration = 1.0 / (2.0 * w1);
    s.dd.M = 12;
    s.dd.f_pulse = s.sys.mw_freqs.at(0);
    s.dd.h1 = w1 * s.sys.mw_h1;
    s.dd.time_steps = 1000;
    ClassicalField f;
    f.amplitude = 0.3;
    f.omega2 = 5.5;
    f.axis = embed(spin_matrices(1.0).z, 0, s.sys.dims);
    s.field = f;
    s.seed = seed;
    return s;
}

std::vector<Segment> dd_schedule(const DDSetup& s, std::size_t index, double tau) {
    switch (s.kind) {
        case DDKind::Hahn: return hahn_schedule(s.dd, tau);
        case DDKind::CPMG: return cpmg_schedule(s.dd, tau);
        case DDKind::XY8: return xy8_schedule(s.dd, tau, std::vector<double>(s.dd.M, 0.0));
        default: return xy8_schedule(s.dd, tau, rxy8_phases(s.seed, index, s.dd.M));
    }
}

SweepResult run_dd(const DDSetup& s, const SolverOptions& solver, const SweepOptions& sweep) {
    SweepResult r;
    switch (s.kind) {
        case DDKind::Hahn:
            r = hahn(s.sys, s.dd, solver, sweep, s.field);
            r.meta.scenario = "hahn";
            break;
        case DDKind::CPMG:
            r = cpmg(s.sys, s.dd, solver, sweep, s.field);
            r.meta.scenario = "cpmg";
            break;
        case DDKind::XY8:
            r = xy8(s.sys, s.dd, false, 0, solver, sweep, s.field);
            r.meta.scenario = "xy8";
            break;
        case DDKind::RXY8:
            r = xy8(s.sys, s.dd, true, s.seed, solver, sweep, s.field);
            r.meta.scenario = "rxy8";
            break;
    }
    return r;
}

CarbonFrequencies carbon_frequencies(const QuantumSystem& sys) {
    const int dc = sys.dims.factors.back();
    const int de = sys.dims.factors.front();
    const int dmid = sys.dims.total() / (de * dc);
    const auto& el = sys.labels.front();
    const int ie0 = static_cast<int>(std::find(el.begin(), el.end(), "0") - el.begin());
    const int iep = static_cast<int>(std::find(el.begin(), el.end(), "+1") - el.begin());
    auto block_gap = [&](int ie) {
        Mat b = sys.H0.data.block(ie * dmid * dc, ie * dmid * dc, dmid * dc, dmid * dc);
        Mat c = Mat::Zero(dc, dc);
        for (int m = 0; m < dmid; ++m) c += b.block(m * dc, m * dc, dc, dc);
        EigenDecomp e = eig_hermitian(Mat(c / static_cast<double>(dmid)));
        return e.values(dc - 1) - e.values(0);
    };
    EigenDecomp full = eig_hermitian(sys.H0);
    const int n = sys.dims.total();
    auto dressed_gap = [&](int ie) {
        // eigenstates keyed by dominant product index
        std::vector<double> e_of(n, std::nan(""));
        for (int k = 0; k < n; ++k) {
            Eigen::Index r;
            full.vectors.col(k).cwiseAbs2().maxCoeff(&r);
            e_of[r] = full.values(k);
        }
        double s = 0;
        int cnt = 0;
        for (int m = 0; m < dmid; ++m) {
            int base = (ie * dmid + m) * dc;
            if (std::isnan(e_of[base]) || std::isnan(e_of[base + 1])) continue;
            s += std::abs(e_of[base] - e_of[base + 1]);
            ++cnt;
        }
        return cnt ? s / cnt : std::nan("");
    };
    return {block_gap(ie0), block_gap(iep), dressed_gap(ie0), dressed_gap(iep)};
}

// ---- teleportation ----

std::vector<RotationOp> reconstruction_ops(TeleportInput row, int c0, int c1) {
    using K = RotationOp::Kind;
    const RotationOp ry_pi{K::Pulse, kPi, kPi / 2, "Ry(pi)"};
    const RotationOp ry_half{K::Pulse, kPi / 2, kPi / 2, "Ry(pi/2)"};
    const RotationOp rmy_half{K::Pulse, kPi / 2, 3 * kPi / 2, "R-y(pi/2)"};
    const RotationOp rx_half{K::Pulse, kPi / 2, 0.0, "Rx(pi/2)"};
    const RotationOp rmx_half{K::Pulse, kPi / 2, kPi, "R-x(pi/2)"};
    const RotationOp rz_pi{K::FreeZ, kPi, 0.0, "Rz(pi)"};
    const int b = 2 * c0 + c1;
    switch (row) {
        case TeleportInput::PlusX:
            if (b == 0 || b == 3) return {rmy_half};
            return {ry_half, rz_pi};
        case TeleportInput::PlusY:
            if (b == 1 || b == 3) return {rmx_half};
            return {rx_half, rz_pi};
        default:
            if (c0 == 0) return {ry_pi};
            return {};
    }
}

void TeleportationPlan::validate() const {
    for (double w : {w1_cnot, w1_mwb, w1_mwa, w1_rf})
        if (!(w > 0)) throw ValidationError("teleportation: Rabi frequencies must be > 0");
    if (!(refocus_total > 1.0 / (2.0 * w1_mwa))) throw ValidationError("teleportation: refocus_total must exceed t_pi^MWa");
    if (input == TeleportInput::Custom) {
        double nrm = std::norm(alpha) + std::norm(beta);
        if (std::abs(nrm - 1.0) > 1e-10) throw ValidationError("teleportation: |alpha|^2 + |beta|^2 must be 1");
        if (rule_row == TeleportInput::Custom) throw ValidationError("teleportation: rule_row must be +X, +Y or +Z");
    }
    if (forced)
        for (int c : *forced)
            if (c != 0 && c != 1) throw ValidationError("teleportation: forced outcomes must be 0 or 1");
}

namespace {

struct TeleportParts {
    QuantumSystem bob, alice, sys;
};

TeleportParts teleport_parts() {
    NVParams pb;
    pb.B0 = 18.0;
    NVParams pa;
    pa.B0 = 25.0;
    pa.isotope = Isotope::N14;
    TeleportParts t;
    t.bob = truncate(build_nv(pb), std::vector<Labels>{Labels{"0", "-1"}});
    t.alice = truncate(build_nv(pa), std::vector<Labels>{Labels{"0", "-1"}, Labels{"0", "-1"}});
    t.sys = compose(t.bob, t.alice);
    return t;
}

Vec input_ket(const TeleportationPlan& plan) {
    Vec v(2);
    const double r = 1.0 / std::sqrt(2.0);
    switch (plan.input) {
        case TeleportInput::PlusX: v << r, r; break;
        case TeleportInput::PlusY: v << r, cplx(0, r); break;
        case TeleportInput::PlusZ: v << 1, 0; break;
        case TeleportInput::Custom: v << plan.alpha, plan.beta; break;
    }
    return v;
}

}  // namespace

QuantumSystem teleportation_system() { return teleport_parts().sys; }

QuantumState teleportation_input(const TeleportationPlan& plan) {
    QuantumSystem sys = teleportation_system();
    // |Psi-> = (|01> - |10>) / sqrt(2), Bob's electron first
    Vec bell = Vec::Zero(4);
    bell(1) = 1.0 / std::sqrt(2.0);
    bell(2) = -1.0 / std::sqrt(2.0);
    Vec psi = input_ket(plan);
    Vec k(8);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) k(2 * i + j) = bell(i) * psi(j);
    return QuantumState::ket(k / k.norm(), sys.dims);
}

TeleportationTiming teleportation_timing(const QuantumSystem& sys, const TeleportationPlan& plan) {
    plan.validate();
    TeleportationTiming t{};
    t.f_cnot = transition_frequency(sys, {"0", "0", "-1"}, {"0", "-1", "-1"});
    t.f_rf = transition_frequency(sys, {"0", "-1", "0"}, {"0", "-1", "-1"});
    // compose() concatenates the parents' hard-pulse frequencies: Bob's first, then Alice's
    t.f_b = sys.mw_freqs.at(0);
    t.f_mwa = sys.mw_freqs.at(2);
    t.t_cnot = 1.0 / (2.0 * plan.w1_cnot);
    t.t_b = 1.0 / (2.0 * plan.w1_mwb);
    t.t_mwa = 1.0 / (2.0 * plan.w1_mwa);
    t.t_rf_half = 1.0 / (4.0 * plan.w1_rf);
    // tau1 + t_cnot + t_b / 2 = T / 2 with T = t_cnot + tau1 + t_b + tau2 + 2 t_rf_half + t_mwa
    // and tau1 + tau2 + t_mwa = refocus_total
    t.tau1 = 0.5 * (plan.refocus_total + 2.0 * t.t_rf_half - t.t_cnot);
    t.tau2 = plan.refocus_total - t.t_mwa - t.tau1;
    if (t.tau1 < 0 || t.tau2 < 0)
        throw ValidationError("teleportation: timing gives negative free evolution (tau1=" + std::to_string(t.tau1) +
                              ", tau2=" + std::to_string(t.tau2) + ")");
    t.total = t.t_cnot + t.tau1 + t.t_b + t.tau2 + 2.0 * t.t_rf_half + t.t_mwa;
    const double w0 = t.f_b;
    t.tau3 = std::ceil(w0 * t.t_b / 2.0) / w0 - t.t_b / 2.0;
    return t;
}

namespace {

struct Protocol {
    TeleportParts parts;
    TeleportationTiming tm;
    Operator hb, ha, hrf;  // unit drive operators on the composite space
};

Protocol make_protocol(const TeleportationPlan& plan) {
    Protocol p;
    p.parts = teleport_parts();
    const QuantumSystem& sys = p.parts.sys;
    p.tm = teleportation_timing(sys, plan);
    p.hb = embed(p.parts.bob.mw_h1, 0, sys.dims);
    p.ha = tensor(identity(2), p.parts.alice.mw_h1);
    p.ha.dims = sys.dims;
    p.hrf = tensor(identity(2), p.parts.alice.rf_h1);
    p.hrf.dims = sys.dims;
    return p;
}

PulseSegment pulse(double dur, const Operator& h1, double f, double phi, const SolverOptions& opt) {
    PulseSegment s;
    s.duration = dur;
    s.h1 = h1;
    s.f_pulse = f;
    s.phi_t = phi;
    s.solver_opts = opt;
    return s;
}

std::vector<Segment> protocol_segments(const Protocol& p, const TeleportationPlan& plan) {
    const auto& t = p.tm;
    const SolverOptions& o = plan.solver;
    return {pulse(t.t_cnot, plan.w1_cnot * p.ha, t.f_cnot, kPi / 2, o),
            FreeSegment{t.tau1, std::nullopt},
            pulse(t.t_b, plan.w1_mwb * p.hb, t.f_b, kPi / 2, o),
            FreeSegment{t.tau2, std::nullopt},
            pulse(t.t_rf_half, plan.w1_rf * p.hrf, t.f_rf, plan.phi_rf, o),
            pulse(t.t_mwa, plan.w1_mwa * p.ha, t.f_mwa, kPi / 2, o),
            pulse(t.t_rf_half, plan.w1_rf * p.hrf, t.f_rf, plan.phi_rf, o)};
}

std::vector<Segment> reconstruction_segments(const Protocol& p, const TeleportationPlan& plan, int c0, int c1,
                                             std::vector<std::string>& labels) {
    const auto& t = p.tm;
    TeleportInput row = plan.input == TeleportInput::Custom ? plan.rule_row : plan.input;
    std::vector<Segment> out;
    for (const auto& op : reconstruction_ops(row, c0, c1)) {
        labels.push_back(op.label);
        if (op.kind == RotationOp::Kind::FreeZ) {
            out.push_back(FreeSegment{1.0 / (2.0 * t.f_b), std::nullopt});
            continue;
        }
        if (std::abs(op.angle - kPi / 2) < 1e-12) out.push_back(FreeSegment{t.tau3, std::nullopt});
        out.push_back(pulse(t.t_b * op.angle / kPi, plan.w1_mwb * p.hb, t.f_b, op.phi, plan.solver));
    }
    return out;
}

TeleportationReport finish_branch(const Engine& eng, Engine::State st, double t, const Protocol& p,
                                  const TeleportationPlan& plan, const MeasureMode& m0, const MeasureMode& m1,
                                  const QuantumState& pre) {
    const QuantumSystem& sys = p.parts.sys;
    Operator P0 = factor_projector(sys, 1, "0");
    Operator P1 = factor_projector(sys, 2, "-1");
    TeleportationReport r;
    r.pre_measurement = pre;
    MeasureOutcome o0 = eng.measure(st, eng.to_eigen(P0.data), m0);
    MeasureOutcome o1 = eng.measure(st, eng.to_eigen(P1.data), m1);
    r.c0 = 1 - o0.bit;
    r.c1 = o1.bit;
    r.probability = o0.probability * o1.probability;
    SequenceResult tmp;
    ScheduleContext ctx{&eng};
    run_segments(ctx, st, reconstruction_segments(p, plan, r.c0, r.c1, r.ops), t, tmp);
    QuantumState fin = eng.unload(st);
    QuantumState bob = partial_trace(fin, {0});
    r.bob_rho = bob.data;
    Vec psi = input_ket(plan);
    r.fidelity = fidelity(bob, QuantumState::ket(psi / psi.norm(), Dims{2}));
    return r;
}

struct Prepared {
    Protocol p;
    std::shared_ptr<Engine> eng;
    Engine::State st;
    double t;
    QuantumState pre;
};

Prepared prepare(const TeleportationPlan& plan) {
    Prepared pr{make_protocol(plan), nullptr, {}, 0.0, {}};
    const QuantumSystem& sys = pr.p.parts.sys;
    pr.eng = std::make_shared<Engine>(sys.H0, std::vector<LindbladTerm>{}, plan.solver);
    pr.st = pr.eng->load(teleportation_input(plan));
    SequenceResult tmp;
    ScheduleContext ctx{pr.eng.get()};
    pr.t = run_segments(ctx, pr.st, protocol_segments(pr.p, plan), 0.0, tmp);
    pr.pre = pr.eng->unload(pr.st);
    return pr;
}

}  // namespace

Sequence teleportation_sequence(const TeleportationPlan& plan, int c0, int c1) {
    plan.validate();
    if ((c0 != 0 && c0 != 1) || (c1 != 0 && c1 != 1)) throw ValidationError("teleportation: outcomes must be 0 or 1");
    Protocol p = make_protocol(plan);
    Sequence seq;
    seq.system = set_initial_state(p.parts.sys, teleportation_input(plan));
    seq.solver = plan.solver;
    seq.segments = protocol_segments(p, plan);
    seq.segments.push_back(MeasureSegment{factor_projector(seq.system, 1, "0"), MeasureMode::forced(1 - c0), false});
    seq.segments.push_back(MeasureSegment{factor_projector(seq.system, 2, "-1"), MeasureMode::forced(c1), false});
    std::vector<std::string> labels;
    for (auto& s : reconstruction_segments(p, plan, c0, c1, labels)) seq.segments.push_back(std::move(s));
    return seq;
}

TeleportationReport scenario_teleportation(const TeleportationPlan& plan) {
    plan.validate();
    Prepared pr = prepare(plan);
    MeasureMode m0 = plan.forced ? MeasureMode::forced(1 - (*plan.forced)[0])
                                 : MeasureMode::sample(derive_seed(plan.seed, "teleport.c0", 0));
    MeasureMode m1 = plan.forced ? MeasureMode::forced((*plan.forced)[1])
                                 : MeasureMode::sample(derive_seed(plan.seed, "teleport.c1", 0));
    return finish_branch(*pr.eng, pr.st, pr.t, pr.p, plan, m0, m1, pr.pre);
}

std::vector<TeleportationReport> teleportation_branches(const TeleportationPlan& plan) {
    plan.validate();
    Prepared pr = prepare(plan);
    std::vector<TeleportationReport> out;
    for (int c0 : {0, 1})
        for (int c1 : {0, 1})
            out.push_back(finish_branch(*pr.eng, pr.st, pr.t, pr.p, plan, MeasureMode::forced(1 - c0),
                                        MeasureMode::forced(c1), pr.pre));
    return out;
}

Table1 table1_report(const SolverOptions& solver, int workers) {
    Table1 t;
    const TeleportInput rows[3] = {TeleportInput::PlusX, TeleportInput::PlusY, TeleportInput::PlusZ};
    std::array<std::vector<TeleportationReport>, 3> res;
    const int w = workers > 0 ? workers : omp_get_max_threads();
    std::array<std::string, 3> err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(w)
    for (int i = 0; i < 3; ++i) {
        try {
            TeleportationPlan plan;
            plan.input = rows[i];
            plan.solver = solver;
            res[i] = teleportation_branches(plan);
        } catch (const std::exception& e) {
            err[i] = e.what();
        }
    }
    for (int i = 0; i < 3; ++i) {
        if (!err[i].empty()) throw SolverError("table1: " + err[i], -1, 0.0);
        for (int b = 0; b < 4; ++b) {
            t.fidelity[i][b] = res[i][b].fidelity;
            t.probability[i][b] = res[i][b].probability;
        }
    }
    return t;
}

}  // namespace nvtwin
