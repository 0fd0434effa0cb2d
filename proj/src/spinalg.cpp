#include "nvtwin/spinalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace nvtwin {

Dims concat(const Dims& a, const Dims& b) {
    std::vector<int> f = a.factors;
    f.insert(f.end(), b.factors.begin(), b.factors.end());
    return Dims(std::move(f));
}

std::string to_string(const Dims& d) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < d.factors.size(); ++i) os << (i ? "," : "") << d.factors[i];
    os << ']';
    return os.str();
}

Operator::Operator(Mat m, Dims d) : data(std::move(m)), dims(std::move(d)) {
    if (data.rows() != data.cols()) throw ValidationError("operator must be square");
    if (dims.factors.empty()) throw ValidationError("operator dims must be non-empty");
    if (dims.total() != data.rows())
        throw ValidationError("operator side " + std::to_string(data.rows()) + " does not match dims " +
                              to_string(dims));
}

bool Operator::is_hermitian(double tol) const { return hermiticity_error(data) <= tol; }

static void check_same(const Operator& a, const Operator& b) {
    if (!(a.dims == b.dims)) throw ValidationError("dims mismatch " + to_string(a.dims) + " vs " + to_string(b.dims));
}

Operator operator+(const Operator& a, const Operator& b) {
    check_same(a, b);
    return {a.data + b.data, a.dims};
}
Operator operator-(const Operator& a, const Operator& b) {
    check_same(a, b);
    return {a.data - b.data, a.dims};
}
Operator operator*(const Operator& a, const Operator& b) {
    check_same(a, b);
    return {a.data * b.data, a.dims};
}
Operator operator*(cplx s, const Operator& a) { return {s * a.data, a.dims}; }
Operator operator*(double s, const Operator& a) { return {s * a.data, a.dims}; }

QuantumState QuantumState::ket(Vec v, Dims d) {
    if (d.total() != v.size()) throw ValidationError("ket length does not match dims " + to_string(d));
    QuantumState s;
    s.kind = Kind::Ket;
    s.data = v;
    s.dims = std::move(d);
    return s;
}

QuantumState QuantumState::density(Mat rho, Dims d) {
    if (rho.rows() != rho.cols() || d.total() != rho.rows())
        throw ValidationError("density shape does not match dims " + to_string(d));
    QuantumState s;
    s.kind = Kind::Density;
    s.data = std::move(rho);
    s.dims = std::move(d);
    return s;
}

Mat QuantumState::as_density() const {
    if (kind == Kind::Density) return data;
    return data * data.adjoint();
}

void QuantumState::validate(double tol) const {
    if (kind == Kind::Ket) {
        double nrm = data.norm();
        if (std::abs(nrm - 1.0) > tol) throw ValidationError("ket not normalized (norm " + std::to_string(nrm) + ")");
        return;
    }
    if (hermiticity_error(data) > tol) throw ValidationError("density not Hermitian");
    if (std::abs(data.trace() - cplx(1.0)) > tol) throw ValidationError("density trace is not 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(data, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) throw ValidationError("density has negative eigenvalue");
}

SpinOps spin_matrices(double j) {
    double twoj = 2.0 * j;
    if (j < 0 || std::abs(twoj - std::round(twoj)) > 1e-12) throw ValidationError("spin must be a non-negative half-integer");
    int d = static_cast<int>(std::lround(twoj)) + 1;
    Mat jp = Mat::Zero(d, d), jz = Mat::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        double m = j - k;
        jz(k, k) = m;
        if (k > 0) jp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    Mat jm = jp.adjoint();
    Dims dims{d};
    return {Operator(0.5 * (jp + jm), dims), Operator(cplx(0, -0.5) * (jp - jm), dims), Operator(jz, dims)};
}

Operator identity(int n) { return {Mat::Identity(n, n), Dims{n}}; }
Operator identity(const Dims& d) { return {Mat::Identity(d.total(), d.total()), d}; }
Operator zeros(const Dims& d) { return {Mat::Zero(d.total(), d.total()), d}; }

static Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

Operator tensor(const std::vector<Operator>& ops) {
    if (ops.empty()) throw ValidationError("tensor of an empty list");
    Mat m = ops[0].data;
    Dims d = ops[0].dims;
    for (std::size_t i = 1; i < ops.size(); ++i) {
        m = kron(m, ops[i].data);
        d = concat(d, ops[i].dims);
    }
    return {std::move(m), std::move(d)};
}

Operator embed(const Operator& op, std::size_t pos, const Dims& dims) {
    if (pos >= dims.size()) throw ValidationError("embed position out of range");
    if (op.n() != dims.factors[pos]) throw ValidationError("embed factor size mismatch");
    std::vector<Operator> parts;
    for (std::size_t i = 0; i < dims.size(); ++i) parts.push_back(i == pos ? op : identity(dims.factors[i]));
    Operator r = tensor(parts);
    r.dims = dims;
    return r;
}

EigenDecomp eig_hermitian(const Mat& a) {
    if (hermiticity_error(a) > 1e-10 * std::max(1.0, max_abs(a))) throw ValidationError("eig_hermitian: input is not Hermitian");
    Mat sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success) throw ValidationError("eig_hermitian: decomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomp eig_hermitian(const Operator& a) { return eig_hermitian(a.data); }

Operator expm_hermitian_prop(const Operator& h, double t) {
    EigenDecomp e = eig_hermitian(h);
    Vec ph(e.values.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -kTwoPi * e.values(k) * t);
    return {e.vectors * ph.asDiagonal() * e.vectors.adjoint(), h.dims};
}

double fidelity(const QuantumState& rho, const QuantumState& psi) {
    if (!psi.is_ket()) throw ValidationError("fidelity target must be a ket");
    if (!(rho.dims == psi.dims)) throw ValidationError("fidelity dims mismatch");
    cplx f = rho.is_ket() ? std::norm((psi.data.adjoint() * rho.data)(0, 0))
                          : (psi.data.adjoint() * rho.data * psi.data)(0, 0);
    return f.real();
}

double trace_distance(const Mat& a, const Mat& b) {
    Mat d = a - b;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double hermiticity_error(const Mat& a) {
    if (a.rows() != a.cols()) return INFINITY;
    return max_abs(a - a.adjoint());
}

QuantumState partial_trace(const QuantumState& s, const std::vector<int>& keep) {
    const auto& f = s.dims.factors;
    int nf = static_cast<int>(f.size());
    std::vector<bool> kept(nf, false);
    for (int k : keep) {
        if (k < 0 || k >= nf) throw ValidationError("partial_trace: factor index out of range");
        kept[k] = true;
    }
    std::vector<int> kd;
    for (int i = 0; i < nf; ++i)
        if (kept[i]) kd.push_back(f[i]);
    if (kd.empty()) throw ValidationError("partial_trace: nothing kept");
    Dims out(kd);
    int n = s.n(), m = out.total();
    Mat rho = s.as_density();
    Mat r = Mat::Zero(m, m);
    // digits of a composite index, most significant factor first
    auto digits = [&](int idx, std::vector<int>& d) {
        for (int i = nf - 1; i >= 0; --i) {
            d[i] = idx % f[i];
            idx /= f[i];
        }
    };
    std::vector<int> di(nf), dj(nf);
    for (int i = 0; i < n; ++i) {
        digits(i, di);
        for (int j = 0; j < n; ++j) {
            digits(j, dj);
            bool diag = true;
            int ri = 0, rj = 0;
            for (int q = 0; q < nf; ++q) {
                if (kept[q]) {
                    ri = ri * f[q] + di[q];
                    rj = rj * f[q] + dj[q];
                } else if (di[q] != dj[q]) {
                    diag = false;
                    break;
                }
            }
            if (diag) r(ri, rj) += rho(i, j);
        }
    }
    return QuantumState::density(r, out);
}

Vec basis_ket(int n, int k) {
    Vec v = Vec::Zero(n);
    v(k) = 1.0;
    return v;
}

}  // namespace nvtwin
