#include "doctest.h"
#include "nvtwin/control.hpp"
#include "nvtwin/spinalg.hpp"

using namespace nvtwin;

namespace {

PulseSegment square_pulse(double dur, double f, double phi) {
    PulseSegment p;
    p.duration = dur;
    p.h1 = 2.0 * spin_matrices(0.5).x;
    p.f_pulse = f;
    p.phi_t = phi;
    return p;
}

}  // namespace

TEST_CASE("square envelope and carrier") {
    PulseSegment p = square_pulse(1.0, 0.0, 0.0);
    CHECK(drive_value(p, 0.5, 0.0) == doctest::Approx(1.0));
    CHECK(drive_value(p, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(drive_value(p, 1.5, 0.0) == 0.0);
    CHECK(p.envelope(1.0) == 0.0);

    PulseSegment q = square_pulse(1.0, 3.0, kPi / 2);
    CHECK(std::abs(drive_value(q, 0.0, 0.0)) < 1e-15);
    // the carrier phase runs on absolute time
    CHECK(drive_value(q, 0.1, 0.2) == doctest::Approx(std::cos(kTwoPi * 3.0 * 0.3 + kPi / 2)));

    PulseSegment g = square_pulse(1.0, 0.0, 0.0);
    g.envelope = EnvelopeSpec::user([](double s) { return s * (1 - s) * 4; });
    CHECK(drive_value(g, 0.5, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("sensing field") {
    ClassicalField f;
    f.amplitude = 0.3;
    f.omega2 = 5.5;
    f.axis = spin_matrices(1.0).z;
    CHECK(sensing_value(f, 0.0) == 0.0);
    CHECK(sensing_value(f, 1.0 / (4 * 5.5)) == doctest::Approx(0.3));
    CHECK(std::abs(sensing_value(f, 1.0 / 5.5)) < 1e-12);
    f.amplitude = -1;
    CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("segment validation") {
    PulseSegment p = square_pulse(0.0, 1.0, 0.0);
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.duration = 1.0;
    p.time_steps = 1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.time_steps = 10;
    p.h1 = Operator(Mat::Zero(2, 2), Dims{2});
    p.h1.data(0, 1) = 1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);

    SolverOptions so;
    so.atol = 0;
    CHECK_THROWS_AS(so.validate(), ValidationError);
}

TEST_CASE("Hamiltonian assembly") {
    Operator H0(Mat::Zero(2, 2), Dims{2});
    H0.data(0, 0) = 1.0;
    H0.data(1, 1) = -1.0;
    TimeDependentHamiltonian free = assemble_rhs(H0, nullptr, nullptr, 0.0);
    CHECK(free.time_independent);
    CHECK(max_abs(free(0.37) - H0.data) == 0.0);

    PulseSegment zero = square_pulse(1.0, 5.0, 0.0);
    zero.h1 = Operator(Mat::Zero(2, 2), Dims{2});
    TimeDependentHamiltonian z = assemble_rhs(H0, &zero, nullptr, 0.0);
    CHECK(max_abs(z(0.2) - H0.data) == 0.0);

    PulseSegment p = square_pulse(1.0, 5.0, 0.3);
    TimeDependentHamiltonian h = assemble_rhs(H0, &p, nullptr, 2.0);
    const double t = 2.4;
    Mat expect = H0.data + std::cos(kTwoPi * 5.0 * t + 0.3) * p.h1.data;
    CHECK(max_abs(h(t) - expect) < 1e-14);
    CHECK(h.f_max == doctest::Approx(5.0));
}
