#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvtwin/spinalg.hpp"
#include "nvtwin/types.hpp"

namespace nvtwin {

enum class Isotope { None, N14, N15 };

Isotope parse_isotope(const std::string& s);
std::string to_string(Isotope iso);

namespace constants {
inline constexpr double D = 2870.0;             // MHz
inline constexpr double gamma_e = -28.025;      // MHz/mT
inline constexpr double gamma_c13 = 10.7084e-3;  // MHz/mT
inline constexpr double B_gslac = 102.4;        // mT
inline constexpr double h_over_kB = 6.62607015e-34 / 1.380649e-23;  // K s
}  // namespace constants

struct IsotopeConstants {
    double a_par = 0, a_perp = 0, gamma_n = 0, Q = 0;
    double spin = 0;
};
IsotopeConstants isotope_constants(Isotope iso);

struct NVParams {
    double B0 = 0.0;     // mT
    double theta = 0.0;  // rad, polar angle from the NV axis
    double phi = 0.0;    // rad
    Isotope isotope = Isotope::None;
    std::optional<double> temperature;  // K
    double n0 = 1.0;

    Eigen::Vector3d field() const;
    void validate() const;
};

struct LindbladTerm {
    Operator c_op;
    double rate = 0.0;  // MHz
};

struct QuantumSystem {
    Operator H0;
    Dims dims;
    QuantumState rho0;
    std::map<std::string, Operator> observables;
    std::vector<LindbladTerm> c_ops;
    std::vector<double> energy_levels;
    Operator mw_h1, rf_h1;
    std::vector<double> mw_freqs, rf_freqs;
    std::vector<std::vector<std::string>> labels;  // per factor, in basis order
    std::vector<std::string> roles;                // "electron", "nitrogen", "spin"
};

using Labels = std::vector<std::string>;

// "+1", "0", "-1" / "+1/2", "-1/2" in descending m.
Labels spin_labels(double j);

QuantumSystem build_nv(const NVParams& p);

// Sum_ij A_ij S_i I_j - gamma_c B.I, electron on factor 0, new spin appended.
Operator hyperfine_h2(const Eigen::Matrix3d& A, double spin_c, const Eigen::Vector3d& B0_vec, double gamma_c,
                      const Dims& sys_dims);

QuantumSystem add_spin(const QuantumSystem& sys, const Operator& H2, int new_dim);
QuantumSystem truncate(const QuantumSystem& sys, const std::vector<Labels>& keep);
QuantumSystem compose(const QuantumSystem& a, const QuantumSystem& b);
QuantumSystem set_initial_state(const QuantumSystem& sys, const QuantumState& s);

// Ascending H0 levels offset to zero, near-degenerate ties broken by basis index.
std::vector<double> energy_levels_of(const Operator& H0);

// Index of the product basis state with the given label on every factor.
int basis_index(const QuantumSystem& sys, const Labels& labels_per_factor);
Vec product_ket(const QuantumSystem& sys, const Labels& labels_per_factor);

// Energy (offset scale) of the eigenstate with the largest overlap on a product state.
double level_energy(const QuantumSystem& sys, const Labels& labels_per_factor);
double transition_frequency(const QuantumSystem& sys, const Labels& a, const Labels& b);

// |label><label| on one factor, identity elsewhere.
Operator factor_projector(const QuantumSystem& sys, std::size_t factor, const std::string& label);

void refresh_levels(QuantumSystem& sys);

}  // namespace nvtwin
