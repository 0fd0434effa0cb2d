#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nvtwin {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Bad input: shapes, ranges, labels, config values.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrator gave up (step underflow, substep budget).
struct SolverError : std::runtime_error {
    int segment = -1;
    double t_reached = 0.0;
    SolverError(const std::string& msg, int seg, double t)
        : std::runtime_error(msg), segment(seg), t_reached(t) {}
};

struct Dims {
    std::vector<int> factors;

    Dims() = default;
    Dims(std::initializer_list<int> f) : factors(f) {}
    explicit Dims(std::vector<int> f) : factors(std::move(f)) {}

    int total() const {
        int n = 1;
        for (int f : factors) n *= f;
        return n;
    }
    std::size_t size() const { return factors.size(); }
    bool operator==(const Dims&) const = default;
};

Dims concat(const Dims& a, const Dims& b);
std::string to_string(const Dims& d);

// Dense operator carrying its tensor-factor signature.
struct Operator {
    Mat data;
    Dims dims;

    Operator() = default;
    Operator(Mat m, Dims d);

    int n() const { return static_cast<int>(data.rows()); }
    bool is_hermitian(double tol = 1e-12) const;
    Operator adjoint() const { return {data.adjoint(), dims}; }
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(cplx s, const Operator& a);
Operator operator*(double s, const Operator& a);

struct QuantumState {
    enum class Kind { Ket, Density };
    Kind kind = Kind::Density;
    Mat data;  // n x 1 for kets, n x n for densities
    Dims dims;

    static QuantumState ket(Vec v, Dims d);
    static QuantumState density(Mat rho, Dims d);

    bool is_ket() const { return kind == Kind::Ket; }
    int n() const { return static_cast<int>(data.rows()); }
    Mat as_density() const;
    void validate(double tol = 1e-10) const;
};

}  // namespace nvtwin
