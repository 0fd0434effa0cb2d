#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvtwin/sequences.hpp"

namespace nvtwin {

std::vector<std::string> scenario_ids();

// Config-level changes to a scenario's NV parameters; unset fields keep the scenario value.
struct SystemOverrides {
    std::optional<double> B0;     // mT
    std::optional<double> theta;  // rad
    std::optional<Isotope> isotope;
    std::optional<double> n0;
    std::optional<double> temperature;  // K

    bool empty() const { return !B0 && !theta && !isotope && !n0 && !temperature; }
    void apply(NVParams& p) const;
};

// ---- conditional gates: NV at 200 mT plus a strongly coupled 13C ----

enum class GateTarget { Electron, Nuclear };

struct ConditionalGateSetup {
    QuantumSystem sys;  // observables: fluorescence, carbon_up
    RabiParams rabi;
};

QuantumSystem conditional_gates_system(const SystemOverrides& ov = {});
// `w1` replaces the amplitude of the targeted transition's drive term (20 electron, 0.8 nuclear).
ConditionalGateSetup conditional_gates_setup(GateTarget which, int points = 1000, bool dissipation = true,
                                             const SystemOverrides& ov = {}, std::optional<double> w1 = {});
SweepResult scenario_conditional_gates(GateTarget which, int points = 1000, bool dissipation = true,
                                       const SolverOptions& solver = {}, const SweepOptions& sweep = {});

// ---- dynamical decoupling ----

enum class DDKind { Hahn, CPMG, XY8, RXY8 };

struct DDSetup {
    DDKind kind = DDKind::Hahn;
    QuantumSystem sys;
    DDParams dd;
    std::optional<ClassicalField> field;
    std::uint64_t seed = 0;
};

DDSetup hahn_setup(int points = 2000, const SystemOverrides& ov = {});
DDSetup cpmg_setup(int M = 16, int points = 200, const SystemOverrides& ov = {});
DDSetup xy8_setup(bool randomize, int points = 1000, std::uint64_t seed = 0, const SystemOverrides& ov = {});
// Schedule of one sweep point, as the sweep would run it.
std::vector<Segment> dd_schedule(const DDSetup& s, std::size_t index, double tau);
SweepResult run_dd(const DDSetup& s, const SolverOptions& solver = {}, const SweepOptions& sweep = {});

// 13C precession frequencies of an NV + 13C system (electron factor 0, carbon last).
// `block`: eigen-gap of the carbon part of the m_S-projected H0 block.
// `dressed`: gap between full H0 eigenstates sharing the electron and nitrogen labels, averaged.
struct CarbonFrequencies {
    double block0, block1;      // m_S = 0, m_S = +1
    double dressed0, dressed1;
};
CarbonFrequencies carbon_frequencies(const QuantumSystem& sys);

// ---- teleportation ----

enum class TeleportInput { PlusX, PlusY, PlusZ, Custom };

struct RotationOp {
    enum class Kind { Pulse, FreeZ };
    Kind kind = Kind::Pulse;
    double angle = 0;  // pi or pi/2
    double phi = 0;    // drive phase: 0 x, pi/2 y, pi -x, 3pi/2 -y
    std::string label;
};

// Reconstruction operations per input row and outcome, in time order.
std::vector<RotationOp> reconstruction_ops(TeleportInput row, int c0, int c1);

struct TeleportationPlan {
    TeleportInput input = TeleportInput::PlusZ;
    cplx alpha = 1.0, beta = 0.0;                       // custom input
    TeleportInput rule_row = TeleportInput::PlusZ;      // reconstruction row for custom input
    double w1_cnot = 2.14 / std::sqrt(3.0);
    double w1_mwb = 22.0;
    double w1_mwa = 16.0;
    double w1_rf = 0.2;
    double phi_rf = 2.95;
    double refocus_total = 2.26;
    std::optional<std::array<int, 2>> forced;  // (c0, c1); sampled when empty
    std::uint64_t seed = 0;
    SolverOptions solver;

    void validate() const;
};

struct TeleportationTiming {
    double f_cnot, f_b, f_mwa, f_rf;
    double t_cnot, t_b, t_mwa, t_rf_half;
    double tau1, tau2, tau3;
    double total;  // protocol duration before reconstruction
};

QuantumSystem teleportation_system();
QuantumState teleportation_input(const TeleportationPlan& plan);
TeleportationTiming teleportation_timing(const QuantumSystem& sys, const TeleportationPlan& plan);

struct TeleportationReport {
    int c0 = 0, c1 = 0;
    double probability = 0;  // p(c0) p(c1 | c0)
    QuantumState pre_measurement;
    Mat bob_rho;
    double fidelity = 0;
    std::vector<std::string> ops;
};

// Whole protocol for one forced branch, measurements and reconstruction included.
Sequence teleportation_sequence(const TeleportationPlan& plan, int c0, int c1);

TeleportationReport scenario_teleportation(const TeleportationPlan& plan);
// All four (c0, c1) branches from a single pre-measurement state.
std::vector<TeleportationReport> teleportation_branches(const TeleportationPlan& plan);

struct Table1 {
    std::array<std::array<double, 4>, 3> fidelity{};     // rows +X, +Y, +Z; columns 00, 01, 10, 11
    std::array<std::array<double, 4>, 3> probability{};
};

inline constexpr std::array<std::array<double, 4>, 3> kTable1Reference{{{0.9624, 0.9814, 0.9889, 0.9878},
                                                                       {0.9585, 0.9713, 0.9779, 0.9945},
                                                                       {0.9999, 0.9998, 0.9985, 0.9981}}};

Table1 table1_report(const SolverOptions& solver = {}, int workers = 0);

}  // namespace nvtwin
