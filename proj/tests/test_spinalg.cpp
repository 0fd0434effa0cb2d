#include <random>

#include "doctest.h"
#include "nvtwin/spinalg.hpp"

using namespace nvtwin;

namespace {

Mat random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = cplx(g(rng), g(rng));
    return (a + a.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("spin matrices") {
    SpinOps h = spin_matrices(0.5);
    CHECK(h.z.data(0, 0).real() == doctest::Approx(0.5));
    CHECK(h.z.data(1, 1).real() == doctest::Approx(-0.5));

    SpinOps s = spin_matrices(1.0);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(s.x.data(0, 1) - r) < 1e-15);
    CHECK(std::abs(s.x.data(1, 0) - r) < 1e-15);
    CHECK(std::abs(s.x.data(1, 2) - r) < 1e-15);
    CHECK(std::abs(s.x.data(2, 1) - r) < 1e-15);
    Mat comm = s.x.data * s.y.data - s.y.data * s.x.data - cplx(0, 1) * s.z.data;
    CHECK(max_abs(comm) < 1e-14);

    CHECK_THROWS_AS(spin_matrices(0.3), ValidationError);
}

TEST_CASE("tensor products") {
    Operator i6 = tensor(identity(2), identity(3));
    CHECK(i6.dims == Dims{2, 3});
    CHECK(max_abs(i6.data - Mat::Identity(6, 6)) == 0.0);

    Operator z = tensor(2.0 * spin_matrices(0.5).z, identity(2));
    Eigen::VectorXcd d = z.data.diagonal();
    CHECK(d(0).real() == 1.0);
    CHECK(d(1).real() == 1.0);
    CHECK(d(2).real() == -1.0);
    CHECK(d(3).real() == -1.0);

    std::mt19937_64 rng(7);
    Mat a = random_hermitian(2, rng), b = random_hermitian(3, rng);
    Operator ab = tensor(Operator(a, Dims{2}), Operator(b, Dims{3}));
    CHECK(std::abs(ab.data.trace() - a.trace() * b.trace()) < 1e-12);

    Operator e = embed(spin_matrices(0.5).z, 1, Dims{3, 2, 2});
    CHECK(max_abs(e.data - tensor({identity(3), spin_matrices(0.5).z, identity(2)}).data) == 0.0);
}

TEST_CASE("hermitian eigendecomposition") {
    Mat d = Mat::Zero(3, 3);
    d(0, 0) = 3;
    d(1, 1) = 1;
    d(2, 2) = 2;
    EigenDecomp e = eig_hermitian(d);
    CHECK(e.values(0) == doctest::Approx(1));
    CHECK(e.values(1) == doctest::Approx(2));
    CHECK(e.values(2) == doctest::Approx(3));

    EigenDecomp x = eig_hermitian(spin_matrices(0.5).x);
    CHECK(x.values(0) == doctest::Approx(-0.5));
    CHECK(x.values(1) == doctest::Approx(0.5));

    std::mt19937_64 rng(11);
    Mat h = random_hermitian(6, rng);
    EigenDecomp r = eig_hermitian(h);
    CHECK(max_abs(r.vectors.adjoint() * r.vectors - Mat::Identity(6, 6)) < 1e-10);
    CHECK(max_abs(r.vectors * r.values.cast<cplx>().asDiagonal() * r.vectors.adjoint() - h) < 1e-10);
}

TEST_CASE("propagator exponential") {
    Operator h(Mat::Zero(2, 2), Dims{2});
    h.data(1, 1) = 3.7;
    CHECK(max_abs(expm_hermitian_prop(h, 0.0).data - Mat::Identity(2, 2)) < 1e-15);
    CHECK(max_abs(expm_hermitian_prop(h, 1.0 / 3.7).data - Mat::Identity(2, 2)) < 1e-10);

    const double w = 2.5;
    Operator hx = (2.0 * w) * spin_matrices(0.5).x;
    Vec psi = expm_hermitian_prop(hx, 1.0 / (8.0 * w)).data * basis_ket(2, 0);
    CHECK(std::norm(psi(0)) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::norm(psi(1)) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("fidelity, trace distance, partial trace") {
    Vec up = basis_ket(2, 0);
    QuantumState psi = QuantumState::ket(up, Dims{2});
    CHECK(fidelity(QuantumState::density(up * up.adjoint(), Dims{2}), psi) == doctest::Approx(1.0));
    CHECK(fidelity(QuantumState::density(Mat::Identity(2, 2) / 2.0, Dims{2}), psi) == doctest::Approx(0.5));

    Vec bell = Vec::Zero(4);
    bell(1) = 1 / std::sqrt(2.0);
    bell(2) = -1 / std::sqrt(2.0);
    QuantumState b = QuantumState::ket(bell, Dims{2, 2});
    CHECK(fidelity(QuantumState::density(Mat::Identity(4, 4) / 4.0, Dims{2, 2}), b) == doctest::Approx(0.25));

    QuantumState a = partial_trace(b, {0});
    CHECK(max_abs(a.data - Mat::Identity(2, 2) / 2.0) < 1e-15);

    Mat r0 = up * up.adjoint(), r1 = Mat::Identity(2, 2) / 2.0;
    CHECK(trace_distance(r0, r0) < 1e-15);
    CHECK(trace_distance(r0, r1) == doctest::Approx(0.5));
}

TEST_CASE("state validation") {
    CHECK_THROWS_AS(QuantumState::ket(Vec::Ones(2), Dims{2}).validate(), ValidationError);
    Mat bad = Mat::Identity(2, 2);
    CHECK_THROWS_AS(QuantumState::density(bad, Dims{2}).validate(), ValidationError);
    Mat neg = Mat::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(QuantumState::density(neg, Dims{2}).validate(), ValidationError);
    CHECK_NOTHROW(QuantumState::density(Mat::Identity(3, 3) / 3.0, Dims{3}).validate());
}
