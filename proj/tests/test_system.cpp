#include <algorithm>

#include "doctest.h"
#include "nvtwin/scenarios.hpp"
#include "nvtwin/system.hpp"

using namespace nvtwin;

namespace {

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

bool contains(const RVec& v, double x, double tol) {
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v(i) - x) < tol) return true;
    return false;
}

}  // namespace

TEST_CASE("zero-field splitting") {
    QuantumSystem s = build_nv({});
    REQUIRE(s.energy_levels.size() == 3);
    CHECK(s.energy_levels[0] == doctest::Approx(0.0));
    CHECK(s.energy_levels[1] == doctest::Approx(2870.0));
    CHECK(s.energy_levels[2] == doctest::Approx(2870.0));
    CHECK(s.H0.is_hermitian());
    CHECK_NOTHROW(s.rho0.validate());
}

TEST_CASE("Zeeman gap and GSLAC") {
    NVParams p;
    p.B0 = 100.0;
    QuantumSystem s = build_nv(p);
    CHECK(std::abs(level_energy(s, {"+1"}) - level_energy(s, {"-1"}) - 5605.0) < 1e-6);

    p.B0 = constants::B_gslac;
    QuantumSystem g = build_nv(p);
    CHECK(std::abs(level_energy(g, {"-1"}) - level_energy(g, {"0"})) < 1.0);
}

TEST_CASE("parameter validation") {
    NVParams p;
    p.B0 = -1;
    CHECK_THROWS_AS(build_nv(p), ValidationError);
    p.B0 = 1;
    p.n0 = 1.5;
    CHECK_THROWS_AS(build_nv(p), ValidationError);
    p.n0 = 1;
    p.temperature = 0.0;
    CHECK_THROWS_AS(build_nv(p), ValidationError);
    CHECK_THROWS_AS(parse_isotope("N16"), ValidationError);
}

TEST_CASE("high-temperature nuclear state") {
    NVParams p;
    p.isotope = Isotope::N15;
    p.temperature = 1e12;
    QuantumSystem s = build_nv(p);
    QuantumState nuc = partial_trace(s.rho0, {1});
    CHECK(max_abs(nuc.data - Mat::Identity(2, 2) / 2.0) < 1e-12);
}

TEST_CASE("13C coupling at 200 mT, level ordering above GSLAC") {
    QuantumSystem s = conditional_gates_system();
    CHECK(s.dims == Dims{3, 2});
    CHECK(level_energy(s, {"0", "+1/2"}) > level_energy(s, {"-1", "+1/2"}));
    CHECK(level_energy(s, {"0", "-1/2"}) > level_energy(s, {"-1", "-1/2"}));
    // S_z I_z splitting in m_S = -1: a_zz/2 on top of the carbon Zeeman term
    double gap = level_energy(s, {"-1", "-1/2"}) - level_energy(s, {"-1", "+1/2"});
    CHECK(std::abs(std::abs(gap) - std::abs(-130.0 * -1.0 - constants::gamma_c13 * 200.0)) < 1e-6);
    CHECK(basis_index(s, {"0", "+1/2"}) == 2);
}

TEST_CASE("hyperfine term") {
    Operator z = hyperfine_h2(Eigen::Matrix3d::Zero(), 0.5, Eigen::Vector3d::Zero(), constants::gamma_c13, Dims{3});
    CHECK(max_abs(z.data) == 0.0);
}

TEST_CASE("Hahn system against brute-force assembly") {
    DDSetup h = hahn_setup(2);
    const double th = -45.0 * kPi / 180.0, B = 4.2;
    Eigen::Vector3d b(B * std::sin(th), 0.0, B * std::cos(th));
    SpinOps S = spin_matrices(1.0), I = spin_matrices(1.0), C = spin_matrices(0.5);
    const Mat e3 = Mat::Identity(3, 3), e2 = Mat::Identity(2, 2);
    auto s = [&](const Mat& m) { return kron(kron(m, e3), e2); };
    auto n = [&](const Mat& m) { return kron(kron(e3, m), e2); };
    auto c = [&](const Mat& m) { return kron(kron(e3, e3), m); };
    const Mat Sv[3] = {S.x.data, S.y.data, S.z.data}, Iv[3] = {I.x.data, I.y.data, I.z.data},
              Cv[3] = {C.x.data, C.y.data, C.z.data};
    const double a_par = -2.14, a_perp = -2.70, gn = -4.316e-3, Q = -5.01;
    Eigen::Matrix3d A;
    A << 5.0, -6.3, -2.9, -6.3, 4.2, -2.3, -2.9, -2.3, 8.2;
    Mat H = constants::D * s(S.z.data * S.z.data);
    for (int k = 0; k < 3; ++k) {
        H -= constants::gamma_e * b(k) * s(Sv[k]);
        H -= gn * b(k) * n(Iv[k]);
        H -= constants::gamma_c13 * b(k) * c(Cv[k]);
        for (int j = 0; j < 3; ++j) H += A(k, j) * s(Sv[k]) * c(Cv[j]);
    }
    H += a_par * s(S.z.data) * n(I.z.data) + a_perp * (s(S.x.data) * n(I.x.data) + s(S.y.data) * n(I.y.data));
    H += Q * n(I.z.data * I.z.data);
    RVec ref = eig_hermitian(H).values, got = eig_hermitian(h.sys.H0).values;
    REQUIRE(ref.size() == 18);
    CHECK((ref - got).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("CPMG tensor gives distinct manifold precession") {
    DDSetup c = cpmg_setup(16, 2);
    CarbonFrequencies f = carbon_frequencies(c.sys);
    CHECK(f.block0 == doctest::Approx(constants::gamma_c13 * 40.1).epsilon(1e-3));
    CHECK(std::abs(f.block1 - f.block0) > 1e-3);
}

TEST_CASE("truncation") {
    NVParams p;
    p.isotope = Isotope::N14;
    p.B0 = 25.0;
    QuantumSystem s = build_nv(p);
    QuantumSystem same = truncate(s, {spin_labels(1.0), spin_labels(1.0)});
    CHECK(max_abs(same.H0.data - s.H0.data) < 1e-14);

    QuantumSystem t = truncate(s, {Labels{"0", "-1"}, Labels{"0", "-1"}});
    CHECK(t.dims == Dims{2, 2});

    NVParams q;
    q.B0 = 30.0;
    QuantumSystem e = build_nv(q);
    QuantumSystem et = truncate(e, {Labels{"0", "-1"}});
    RVec full = eig_hermitian(e.H0).values, part = eig_hermitian(et.H0).values;
    for (int i = 0; i < part.size(); ++i) CHECK(contains(full, part(i), 1e-9));
}

TEST_CASE("composition") {
    NVParams p;
    p.B0 = 18.0;
    QuantumSystem a = truncate(build_nv(p), {Labels{"0", "-1"}});
    p.B0 = 25.0;
    QuantumSystem b = build_nv(p);
    QuantumSystem ab = compose(a, b);
    CHECK(ab.dims == Dims{2, 3});
    std::vector<double> sums;
    for (double x : a.energy_levels)
        for (double y : b.energy_levels) sums.push_back(x + y);
    std::sort(sums.begin(), sums.end());
    for (double& v : sums) v -= sums.front();
    REQUIRE(ab.energy_levels.size() == sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) CHECK(ab.energy_levels[i] == doctest::Approx(sums[i]).epsilon(1e-9));

    CHECK(teleportation_system().dims == Dims{2, 2, 2});
}

TEST_CASE("initial states") {
    TeleportationPlan plan;
    QuantumState in = teleportation_input(plan);
    CHECK(std::abs(in.data.norm() - 1.0) < 1e-12);

    QuantumSystem s = build_nv({});
    CHECK_THROWS_AS(set_initial_state(s, QuantumState::ket(Vec::Ones(3), Dims{3})), ValidationError);
}
