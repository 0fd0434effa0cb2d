#pragma once

#include <vector>

#include "nvtwin/types.hpp"

namespace nvtwin {

struct SpinOps {
    Operator x, y, z;
};

// Basis runs m = +j, j-1, ..., -j.
SpinOps spin_matrices(double j);

Operator identity(int n);
Operator identity(const Dims& d);
Operator zeros(const Dims& d);
Operator tensor(const std::vector<Operator>& ops);
inline Operator tensor(const Operator& a, const Operator& b) { return tensor(std::vector<Operator>{a, b}); }

// Single-factor operator placed at `pos` inside `dims`, identities elsewhere.
Operator embed(const Operator& op, std::size_t pos, const Dims& dims);

struct EigenDecomp {
    RVec values;  // ascending
    Mat vectors;  // columns
};

EigenDecomp eig_hermitian(const Operator& a);
EigenDecomp eig_hermitian(const Mat& a);

// exp(-2 pi i H t), H in MHz, t in us.
Operator expm_hermitian_prop(const Operator& h, double t);

// <psi|rho|psi>
double fidelity(const QuantumState& rho, const QuantumState& psi);

double trace_distance(const Mat& a, const Mat& b);
double max_abs(const Mat& a);
double hermiticity_error(const Mat& a);

// Reduced density over the factors listed in `keep` (ascending order).
QuantumState partial_trace(const QuantumState& s, const std::vector<int>& keep);

Vec basis_ket(int n, int k);

}  // namespace nvtwin
