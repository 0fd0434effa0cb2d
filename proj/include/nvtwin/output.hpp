#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nvtwin/sequences.hpp"

namespace nvtwin {

inline constexpr const char* kEngineVersion = "0.1.0";

// Header "variable,<names>", one row per point, 12 significant digits.
void write_csv(const SweepResult& res, std::ostream& out);
std::string to_csv(const SweepResult& res);

// Result object with metadata (wall time and worker count excluded) and, if present, final states
// as nested [re, im] pairs. Doubles are written in shortest round-trip form; NaN becomes null.
std::string to_json(const SweepResult& res);
SweepResult result_from_json(const std::string& text);

// Writes <dir>/result.<format>; returns the path.
std::string write_result(const SweepResult& res, const std::string& format, const std::string& dir);

struct RunManifest {
    std::string engine_version = kEngineVersion;
    std::string scenario;
    std::string config_hash;
    std::uint64_t seed = 0;
    double wall_time = 0;  // s
    int workers = 0;
    std::string status = "ok";  // ok | validation_error | solver_error
    std::string error;
    StepStats steps;
    std::vector<StepStats> segment_steps;
    std::vector<std::string> warnings;
    std::size_t failures = 0;
    std::vector<std::string> outputs;
    std::string effective_config;  // canonical YAML
};

std::string to_json(const RunManifest& m);
// Writes <dir>/manifest.json, creating the directory; returns the path.
std::string write_manifest(const RunManifest& m, const std::string& dir);

}  // namespace nvtwin
