#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nvtwin/adams.hpp"
#include "nvtwin/control.hpp"
#include "nvtwin/system.hpp"
#include "nvtwin/types.hpp"

namespace nvtwin {

struct MeasureMode {
    enum class Kind { Sample, Forced };
    Kind kind = Kind::Sample;
    std::uint64_t seed = 0;
    int bit = 1;

    static MeasureMode sample(std::uint64_t seed) { return {Kind::Sample, seed, 0}; }
    static MeasureMode forced(int bit) { return {Kind::Forced, 0, bit}; }
};

struct MeasureOutcome {
    int bit = 0;
    double probability = 0.0;  // of the reported branch
    QuantumState post_state;
};

struct Sample {
    double t;
    std::vector<double> values;
};

// Time evolution in the eigenbasis of a fixed H0. The state is carried as a
// column factor Psi (rho = Psi Psi^dag) when no dissipator is present, else as rho.
// Time-dependent segments are integrated in the interaction picture of H0.
class Engine {
public:
    struct State {
        bool factored = true;
        Mat m;
        bool from_ket = false;
    };

    Engine(const Operator& H0, const std::vector<LindbladTerm>& lindblad, SolverOptions opt = {});

    bool dissipative() const { return !cops_.empty(); }
    State load(const QuantumState& s) const;
    QuantumState unload(const State& s) const;
    Mat to_eigen(const Mat& op) const { return V_.adjoint() * op * V_; }

    // `record` (eigenbasis observables) sampled on `time_steps` uniform points when non-empty.
    StepStats pulse(State& s, const PulseSegment& seg, const ClassicalField* field, double t_start,
                    const std::vector<Mat>* record = nullptr, std::vector<Sample>* samples = nullptr,
                    int segment_index = -1) const;
    StepStats free(State& s, double duration, const ClassicalField* field, double t_start,
                   int segment_index = -1) const;
    // One pulse of seg.duration; `cb(i, state)` fires at each local time stops[i] (ascending, in (0, duration]).
    // With a square envelope the state at stops[i] equals that after a pulse of length stops[i].
    using StopCallback = std::function<void(std::size_t, const State&)>;
    StepStats pulse_trajectory(State& s, const PulseSegment& seg, const ClassicalField* field, double t_start,
                               const std::vector<double>& stops, const StopCallback& cb, int segment_index = -1) const;

    double expect(const State& s, const Mat& obs_eigen) const;
    double branch_probability(const State& s, const Mat& proj_eigen) const;
    MeasureOutcome measure(State& s, const Mat& proj_eigen, const MeasureMode& mode) const;
    double min_eigenvalue(const State& s) const;

    const RVec& energies() const { return E_; }
    const Mat& eigenvectors() const { return V_; }
    const Dims& dims() const { return dims_; }
    const SolverOptions& options() const { return opt_; }

private:
    StepStats integrate(State& s, double t_start, double duration, const PulseSegment* seg, const ClassicalField* field,
                        double h_max, const std::vector<double>& stops, const StopCallback& cb, int segment_index,
                        const SolverOptions& opt) const;
    void dissipate_exact(State& s, double duration) const;

    Dims dims_;
    RVec E_;
    Mat V_;
    struct CollapseE {
        Mat c, k;  // C and C^dag C in the eigenbasis
        double rate;
    };
    std::vector<CollapseE> cops_;
    double cop_fmax_ = 0;  // fastest Bohr frequency coupled by a collapse operator
    SolverOptions opt_;
};

struct EvolveResult {
    QuantumState state;
    double t_end = 0.0;
    StepStats stats;
    std::vector<Sample> samples;
};

EvolveResult evolve_pulse(const QuantumState& state, const Operator& H0, const PulseSegment& seg,
                          const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                          const std::vector<Operator>& record = {});
QuantumState evolve_free(const QuantumState& state, const Operator& H0, double duration,
                         const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start = 0.0,
                         SolverOptions opt = {});
double expectation(const QuantumState& state, const Operator& obs);
MeasureOutcome measure(const QuantumState& state, const Operator& projector, const MeasureMode& mode);

// Uniform draw in [0, 1) from a 64-bit seed.
double uniform01(std::uint64_t seed);

}  // namespace nvtwin
