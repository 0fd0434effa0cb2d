#pragma once

#include <string>
#include <vector>

#include "nvtwin/config.hpp"

namespace nvtwin {

// Scenario inputs after applying config overrides.
ConditionalGateSetup gate_setup(const ScenarioConfig& cfg);
DDSetup dd_setup(const ScenarioConfig& cfg);
TeleportationPlan teleport_plan(const ScenarioConfig& cfg);

// Config with every scenario default written out (sweep, M, t_pi, f_pulse, time_steps, solver, teleport input).
ScenarioConfig effective_config(const ScenarioConfig& cfg);

// Teleportation rows are branches: variable = 2 c0 + c1, columns c0, c1, probability, fidelity.
SweepResult run_config(const ScenarioConfig& cfg);

struct OracleReport {
    std::string scenario;
    std::vector<double> variable;
    std::vector<double> distance;  // trace distance engine vs oracle, per point
    double max_distance = 0;
    std::vector<std::string> invariant_violations;
};

// Final states of the production sweep path against the piecewise-exponential oracle on the same schedules.
OracleReport oracle_check(const ScenarioConfig& cfg, const OracleOptions& opt = {});

}  // namespace nvtwin
