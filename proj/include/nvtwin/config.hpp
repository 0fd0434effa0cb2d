#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvtwin/scenarios.hpp"

namespace nvtwin {

struct SweepSpec {
    double start = 0, stop = 0;
    int count = 0;

    std::vector<double> values() const { return linspace(start, stop, count); }
};

struct SystemSection {
    std::optional<double> B0;         // mT
    std::optional<double> theta_deg;  // polar field angle, degrees
    std::optional<Isotope> isotope;
    std::optional<double> n0;
    std::optional<double> temperature;  // K

    SystemOverrides overrides() const;
    bool empty() const { return !B0 && !theta_deg && !isotope && !n0 && !temperature; }
};

struct SequenceSection {
    std::optional<SweepSpec> sweep;
    std::optional<int> M;
    std::optional<double> t_pi;
    std::optional<double> w1;
    std::optional<double> f_pulse;
    std::optional<int> time_steps;
};

// Teleportation only. With both outcomes set the branch is forced; `mode: sample` draws outcomes from the seed;
// otherwise all four branches are enumerated.
struct TeleportSection {
    std::optional<std::string> input;  // "+X", "+Y", "+Z"
    std::optional<int> c0, c1;
    std::optional<std::string> mode;  // "branches" or "sample"
};

struct ScenarioConfig {
    std::string scenario;
    SystemSection system;
    SequenceSection sequence;
    TeleportSection teleportation;
    std::optional<double> atol, rtol;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string output = "out";
    std::string format = "csv";
    bool keep_states = false;

    SolverOptions solver() const;
    // Range and compatibility checks; throws ValidationError naming the field path.
    void validate() const;
};

// Strict parse: unknown keys, wrong types and out-of-range values are rejected with source:line:column.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

// Canonical YAML: fixed key order, shortest round-trip numbers, unset optionals omitted.
std::string to_yaml(const ScenarioConfig& c);
// FNV-1a over the canonical form with `output` and `workers` cleared; hex, 16 digits.
std::string config_hash(const ScenarioConfig& c);

}  // namespace nvtwin
