#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nvtwin/output.hpp"
#include "nvtwin/runner.hpp"

using namespace nvtwin;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out, format;
    std::optional<double> atol, rtol;

    void apply(ScenarioConfig& c) const {
        if (seed) c.seed = *seed;
        if (workers) c.workers = *workers;
        if (out) c.output = *out;
        if (format) c.format = *format;
        if (atol) c.atol = *atol;
        if (rtol) c.rtol = *rtol;
        c.validate();
    }
};

const char* describe(const std::string& id) {
    if (id == "rabi_electron") return "electron Rabi conditioned on the 13C state, 200 mT";
    if (id == "rabi_nuclear") return "13C Rabi in m_S = -1 with dephasing, 200 mT";
    if (id == "hahn") return "Hahn echo ESEEM, 4.2 mT at -45 deg, N14 + 13C";
    if (id == "cpmg") return "CPMG-M resonance scan near tau = 16.8 us, 40.1 mT";
    if (id == "xy8") return "XY8-12 sensing of a 5.5 MHz field, N15, 40 mT";
    if (id == "rxy8") return "XY8-12 with seeded random block phases";
    if (id == "teleportation") return "two-node teleportation, all measurement branches";
    return "";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int fail(RunManifest& m, const std::string& dir, const std::string& status, const std::string& msg, int code) {
    m.status = status;
    m.error = msg;
    std::cerr << "error: " << msg << "\n";
    try {
        write_manifest(m, dir);
    } catch (const std::exception& e) {
        std::cerr << "error: could not write manifest: " << e.what() << "\n";
    }
    return code;
}

// Loads and overrides a config; on failure writes the manifest and returns the exit code.
std::optional<ScenarioConfig> prepare(const std::string& path, const Overrides& ov, RunManifest& m, int& code) {
    try {
        ScenarioConfig c = load_config(path);
        ov.apply(c);
        c = effective_config(c);
        m.scenario = c.scenario;
        m.seed = c.seed;
        m.workers = c.workers;
        m.config_hash = config_hash(c);
        m.effective_config = to_yaml(c);
        return c;
    } catch (const std::exception& e) {
        code = fail(m, ov.out.value_or("out"), "validation_error", e.what(), 1);
    }
    return std::nullopt;
}

int cmd_run(const std::string& path, const Overrides& ov) {
    RunManifest m;
    int code = 0;
    auto cfg = prepare(path, ov, m, code);
    if (!cfg) return code;
    auto t0 = std::chrono::steady_clock::now();
    try {
        SweepResult r = run_config(*cfg);
        m.wall_time = seconds_since(t0);
        m.steps = r.meta.steps;
        m.segment_steps = r.meta.segment_steps;
        m.warnings = r.meta.warnings;
        m.failures = r.failures.size();
        m.outputs.push_back(write_result(r, cfg->format, cfg->output));
        bool solver_fail = false;
        for (const auto& f : r.failures) {
            std::cerr << "point " << f.index << " failed: " << f.message << "\n";
            solver_fail = solver_fail || f.solver;
        }
        if (!r.failures.empty()) {
            return fail(m, cfg->output, solver_fail ? "solver_error" : "validation_error",
                        std::to_string(r.failures.size()) + " sweep point(s) failed", solver_fail ? 2 : 1);
        }
        write_manifest(m, cfg->output);
        std::printf("%s: %zu points, %ld steps, %.2f s -> %s\n", cfg->scenario.c_str(), r.variable.size(),
                    r.meta.steps.steps, m.wall_time, m.outputs.front().c_str());
        return 0;
    } catch (const ValidationError& e) {
        m.wall_time = seconds_since(t0);
        return fail(m, cfg->output, "validation_error", e.what(), 1);
    } catch (const SolverError& e) {
        m.wall_time = seconds_since(t0);
        return fail(m, cfg->output, "solver_error", e.what(), 2);
    } catch (const std::exception& e) {
        m.wall_time = seconds_since(t0);
        return fail(m, cfg->output, "solver_error", e.what(), 2);
    }
}

int cmd_oracle(const std::string& path, const Overrides& ov) {
    RunManifest m;
    int code = 0;
    auto cfg = prepare(path, ov, m, code);
    if (!cfg) return code;
    auto t0 = std::chrono::steady_clock::now();
    try {
        OracleReport rep = oracle_check(*cfg);
        m.wall_time = seconds_since(t0);
        std::filesystem::create_directories(cfg->output);
        std::string csv = (std::filesystem::path(cfg->output) / "oracle.csv").string();
        std::ofstream out(csv);
        out << "variable,trace_distance\n";
        for (std::size_t i = 0; i < rep.variable.size(); ++i) {
            char buf[80];
            std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", rep.variable[i], rep.distance[i]);
            out << buf;
        }
        m.outputs.push_back(csv);
        m.warnings = rep.invariant_violations;
        for (const auto& w : rep.invariant_violations) std::cerr << "invariant: " << w << "\n";
        std::printf("%s: %zu points, max trace distance %.3e (threshold 1e-6)\n", rep.scenario.c_str(),
                    rep.distance.size(), rep.max_distance);
        if (!(rep.max_distance < 1e-6) || !rep.invariant_violations.empty())
            return fail(m, cfg->output, "solver_error", "engine and oracle disagree", 2);
        write_manifest(m, cfg->output);
        return 0;
    } catch (const ValidationError& e) {
        return fail(m, cfg->output, "validation_error", e.what(), 1);
    } catch (const std::exception& e) {
        return fail(m, cfg->output, "solver_error", e.what(), 2);
    }
}

int cmd_table1(const Overrides& ov) {
    RunManifest m;
    m.scenario = "teleportation";
    const std::string dir = ov.out.value_or("out");
    auto t0 = std::chrono::steady_clock::now();
    try {
        SolverOptions so;
        if (ov.atol) so.atol = *ov.atol;
        if (ov.rtol) so.rtol = *ov.rtol;
        so.validate();
        m.workers = ov.workers.value_or(0);
        Table1 t = table1_report(so, m.workers);
        m.wall_time = seconds_since(t0);
        const char* rows[3] = {"+X", "+Y", "+Z"};
        std::printf("input   c=00     c=01     c=10     c=11\n");
        for (int i = 0; i < 3; ++i) {
            std::printf("%-5s", rows[i]);
            for (int b = 0; b < 4; ++b) std::printf("   %.4f", t.fidelity[i][b]);
            std::printf("\n");
        }
        SweepResult r;
        r.variable_name = "row";
        r.names = {"F00", "F01", "F10", "F11"};
        for (int i = 0; i < 3; ++i) {
            r.variable.push_back(i);
            for (int b = 0; b < 4; ++b) r.expectations[r.names[b]].push_back(t.fidelity[i][b]);
        }
        m.outputs.push_back(write_result(r, ov.format.value_or("csv"), dir));
        write_manifest(m, dir);
        return 0;
    } catch (const ValidationError& e) {
        return fail(m, dir, "validation_error", e.what(), 1);
    } catch (const std::exception& e) {
        return fail(m, dir, "solver_error", e.what(), 2);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NV-center lab-frame spin dynamics"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides ov;
    app.add_option("--seed", ov.seed, "master seed");
    app.add_option("--workers", ov.workers, "sweep worker threads (0 = OpenMP default)");
    app.add_option("--out", ov.out, "output directory");
    app.add_option("--format", ov.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--atol", ov.atol, "absolute solver tolerance");
    app.add_option("--rtol", ov.rtol, "relative solver tolerance");

    std::string path;
    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", path, "YAML config")->required();
    auto* list = app.add_subcommand("list-scenarios", "print scenario ids");
    auto* table = app.add_subcommand("table1", "teleportation fidelity grid, all branches");
    auto* oracle = app.add_subcommand("oracle-check", "compare the adaptive engine with the exponential oracle");
    oracle->add_option("config", path, "YAML config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (*list) {
        for (const auto& id : scenario_ids()) std::printf("%-15s %s\n", id.c_str(), describe(id));
        return 0;
    }
    if (*table) return cmd_table1(ov);
    if (*run) return cmd_run(path, ov);
    if (*oracle) return cmd_oracle(path, ov);
    return 1;
}
