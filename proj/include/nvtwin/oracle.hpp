#pragma once

#include <optional>
#include <vector>

#include "nvtwin/control.hpp"
#include "nvtwin/system.hpp"
#include "nvtwin/types.hpp"

namespace nvtwin {

// Brute-force lab-frame reference: uniform substeps, each advanced by the exponential of
// H(t) sampled inside the substep. Independent of the eigenbasis engine and the Adams code.
struct OracleOptions {
    enum class Scheme { Midpoint, Magnus4 };
    Scheme scheme = Scheme::Magnus4;
    long min_substeps = 10'000;
    double per_period = 64.0;  // substeps per period of the fastest lab-frame frequency
};

QuantumState oracle_pulse(const QuantumState& state, const Operator& H0, const PulseSegment& seg,
                          const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                          const OracleOptions& opt = {});
QuantumState oracle_free(const QuantumState& state, const Operator& H0, double duration,
                         const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                         const OracleOptions& opt = {});

// Substeps used for a segment of `duration` with fastest frequency content `f_scale` MHz.
long oracle_substeps(double duration, double f_scale, const OracleOptions& opt);

}  // namespace nvtwin
