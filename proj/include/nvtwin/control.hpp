#pragma once

#include <functional>
#include <optional>

#include "nvtwin/types.hpp"

namespace nvtwin {

struct SolverOptions {
    double atol = 1e-10;
    double rtol = 1e-8;
    long max_substeps = 10'000'000;
    int max_order = 12;
    bool dense_output = false;

    void validate() const;
};

struct EnvelopeSpec {
    enum class Kind { Square, User };
    Kind kind = Kind::Square;
    std::function<double(double)> fn;  // normalized time s = t / duration

    static EnvelopeSpec square() { return {}; }
    static EnvelopeSpec user(std::function<double(double)> f) { return {Kind::User, std::move(f)}; }
    double operator()(double s) const;
};

struct PulseSegment {
    double duration = 0.0;  // us
    Operator h1;            // MHz
    EnvelopeSpec envelope;
    double f_pulse = 0.0;  // MHz
    double phi_t = 0.0;    // rad
    int time_steps = 100;
    std::optional<SolverOptions> solver_opts;

    void validate() const;
};

// amplitude * sin(2 pi omega2 t) * axis
struct ClassicalField {
    double amplitude = 0.0;  // MHz
    double omega2 = 0.0;     // MHz
    Operator axis;

    void validate() const;
};

struct FreeSegment {
    double duration = 0.0;
    std::optional<ClassicalField> classical_field;
};

// envelope(t_local / duration) * cos(2 pi f (t_start + t_local) + phi)
double drive_value(const PulseSegment& seg, double t_local, double t_start);
double sensing_value(const ClassicalField& f, double t_global);

// H(t) = H0 + drive(t) h1 + field(t) axis
struct TimeDependentHamiltonian {
    Operator H0;
    const PulseSegment* pulse = nullptr;
    const ClassicalField* field = nullptr;
    double t_start = 0.0;
    bool time_independent = true;
    double f_max = 0.0;  // largest carrier present

    Mat operator()(double t_global) const;
};

TimeDependentHamiltonian assemble_rhs(const Operator& H0, const PulseSegment* pulse, const ClassicalField* field,
                                      double t_start);

}  // namespace nvtwin
