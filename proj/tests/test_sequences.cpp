#include "doctest.h"
#include "nvtwin/scenarios.hpp"

using namespace nvtwin;

namespace {

QuantumSystem nv200() {
    NVParams p;
    p.B0 = 200.0;
    return build_nv(p);
}

PulseSegment pi_pulse(const QuantumSystem& nv) {
    PulseSegment s;
    s.duration = 1.0 / 40.0;
    s.h1 = 20.0 * nv.mw_h1;
    s.f_pulse = transition_frequency(nv, {"0"}, {"-1"});
    return s;
}

// Bare NV electron (no nuclei) at 40 mT with the Hahn drive parameters.
DDSetup bare_dd(int M) {
    NVParams p;
    p.B0 = 40.0;
    DDSetup s;
    s.sys = build_nv(p);
    s.kind = DDKind::CPMG;
    s.dd.pi_duration = 1.0 / 30.0;
    s.dd.M = M;
    s.dd.f_pulse = s.sys.mw_freqs.at(0);
    s.dd.h1 = 15.0 * s.sys.mw_h1;
    s.dd.tau = {0.3, 0.7, 1.1};
    return s;
}

}  // namespace

TEST_CASE("empty sequence returns the initial state") {
    Sequence seq;
    seq.system = nv200();
    SequenceResult r = run(seq);
    CHECK(max_abs(r.final_state.as_density() - seq.system.rho0.as_density()) < 1e-15);
    CHECK(r.t_end == 0.0);
}

TEST_CASE("two pi pulses return the population") {
    QuantumSystem nv = nv200();
    SequenceBuilder b(nv);
    b.add_pulse(pi_pulse(nv));
    CHECK(expectation(b.state(), nv.observables.at("fluorescence")) <= 0.005);
    PulseSegment second = pi_pulse(nv);
    b.add_pulse(second);
    CHECK(expectation(b.state(), nv.observables.at("fluorescence")) >= 0.99);
    CHECK(b.time() == doctest::Approx(0.05));

    // deferred builder runs the same schedule
    SequenceBuilder d(nv, false);
    d.add_pulse(pi_pulse(nv));
    d.add_pulse(second);
    CHECK(trace_distance(d.run().final_state.as_density(), b.state().as_density()) < 1e-9);
}

TEST_CASE("terminal measurement closes the builder") {
    QuantumSystem nv = nv200();
    SequenceBuilder b(nv);
    b.add_pulse(pi_pulse(nv));
    b.add_measure(nv.observables.at("fluorescence"), MeasureMode::sample(3), true);
    CHECK_THROWS_AS(b.add_free(0.1), ValidationError);
}

TEST_CASE("Rabi sweep") {
    QuantumSystem nv = nv200();
    RabiParams r;
    r.durations = linspace(0.0, 0.05, 21);
    r.h1 = 20.0 * nv.mw_h1;
    r.f_pulse = transition_frequency(nv, {"0"}, {"-1"});
    SweepResult s = rabi(nv, r);
    const auto& F = s.expectations.at("fluorescence");
    CHECK(F.front() == doctest::Approx(1.0));
    CHECK(F[10] <= 0.005);  // t = 0.025
    CHECK(F.back() >= 0.99);
    for (double v : F) CHECK((v >= -1e-6 && v <= 1 + 1e-6));

    // per-point runs give the same curve as the single trajectory
    RabiParams sep = r;
    sep.single_trajectory = false;
    SweepResult t = rabi(nv, sep);
    for (std::size_t i = 0; i < F.size(); ++i) CHECK(std::abs(F[i] - t.expectations.at("fluorescence")[i]) < 1e-7);

    // vanishing drive leaves the state bright
    r.h1 = 1e-9 * nv.mw_h1;
    SweepResult z = rabi(nv, r);
    for (double v : z.expectations.at("fluorescence")) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

    RabiParams bad = r;
    bad.durations = {0.1, 0.05};
    CHECK_THROWS_AS(rabi(nv, bad), ValidationError);
}

TEST_CASE("echo on a bare electron refocuses") {
    DDSetup s = bare_dd(1);
    SweepResult h = hahn(s.sys, s.dd);
    for (double v : h.expectations.at("fluorescence")) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("CPMG with one pulse is the Hahn echo") {
    DDSetup s = bare_dd(1);
    s.sys = cpmg_setup(1, 2).sys;  // weakly coupled carbon, so the curve is not trivial
    s.dd.f_pulse = s.sys.mw_freqs.at(0);
    s.dd.h1 = 15.0 * s.sys.mw_h1;
    SweepResult h = hahn(s.sys, s.dd);
    DDParams c = s.dd;
    for (double& t : c.tau) t *= 2.0;
    SweepResult m = cpmg(s.sys, c);
    for (std::size_t i = 0; i < c.tau.size(); ++i)
        CHECK(std::abs(h.expectations.at("fluorescence")[i] - m.expectations.at("fluorescence")[i]) < 1e-8);
}

TEST_CASE("finite pulse length matters") {
    DDSetup a = hahn_setup(4);
    a.dd.tau = linspace(0.2, 1.0, 4);
    SweepResult ra = run_dd(a);
    DDSetup b = a;
    b.dd.pi_duration *= 2.0;
    b.dd.h1 = 0.5 * b.dd.h1;
    SweepResult rb = run_dd(b);
    double diff = 0;
    for (std::size_t i = 0; i < 4; ++i)
        diff = std::max(diff, std::abs(ra.expectations.at("fluorescence")[i] - rb.expectations.at("fluorescence")[i]));
    CHECK(diff > 1e-3);
}

TEST_CASE("DD validation") {
    DDSetup s = bare_dd(2);
    s.dd.tau = {0.01};
    CHECK_THROWS_AS(cpmg(s.sys, s.dd), ValidationError);
    s.dd.tau = {0.5};
    s.dd.M = 0;
    CHECK_THROWS_AS(cpmg(s.sys, s.dd), ValidationError);
}

TEST_CASE("XY8 without a field is flat") {
    SystemOverrides bare;
    bare.isotope = Isotope::None;
    DDSetup s = xy8_setup(false, 3, 0, bare);
    s.dd.M = 1;
    s.field->amplitude = 0.0;
    SweepResult r = run_dd(s);
    for (double v : r.expectations.at("fluorescence")) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("XY8 schedule layout") {
    DDSetup s = xy8_setup(false, 3);
    auto segs = xy8_schedule(s.dd, 0.09, std::vector<double>(s.dd.M, 0.0));
    int pulses = 0;
    for (const auto& g : segs) pulses += std::holds_alternative<PulseSegment>(g);
    CHECK(pulses == 8 * s.dd.M + 2);
    CHECK(total_duration(segs) == doctest::Approx(8 * s.dd.M * 0.09 + s.dd.pi_duration));
}

TEST_CASE("sweep determinism across workers") {
    DDSetup s = xy8_setup(true, 4, 42);
    s.dd.M = 1;
    SweepOptions one, two;
    one.workers = 1;
    two.workers = 3;
    SweepResult a = run_dd(s, {}, one), b = run_dd(s, {}, two);
    CHECK(a.expectations.at("fluorescence") == b.expectations.at("fluorescence"));
    CHECK(rxy8_phases(42, 2, 12) == rxy8_phases(42, 2, 12));
    CHECK(rxy8_phases(42, 2, 12) != rxy8_phases(42, 3, 12));

    std::vector<double> v = linspace(0.0, 1.0, 6);
    PointFn fn = [](std::size_t i, double x) {
        PointResult p;
        p.values = {x * x, static_cast<double>(i)};
        return p;
    };
    SweepResult e = sweep_engine(v, {"sq", "idx"}, fn, two), f = sweep_serial(v, {"sq", "idx"}, fn, one);
    CHECK(e.expectations == f.expectations);
}

TEST_CASE("sweep failures are collected") {
    std::vector<double> v = {1, 2, 3};
    PointFn fn = [](std::size_t i, double) -> PointResult {
        if (i == 1) throw SolverError("boom", 0, 0.0);
        PointResult p;
        p.values = {1.0};
        return p;
    };
    SweepResult r = sweep_engine(v, {"a"}, fn, {});
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].index == 1);
    CHECK(r.failures[0].solver);
    CHECK(std::isnan(r.expectations.at("a")[1]));
}
