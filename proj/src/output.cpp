#include "nvtwin/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nvtwin {

using nlohmann::json;

namespace {

std::string g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json stats_json(const StepStats& s) {
    return {{"steps", s.steps}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}, {"max_order", s.max_order}};
}

StepStats stats_from(const json& j) {
    StepStats s;
    s.steps = j.at("steps").get<long>();
    s.rejected = j.at("rejected").get<long>();
    s.rhs_evals = j.at("rhs_evals").get<long>();
    s.max_order = j.at("max_order").get<int>();
    return s;
}

json state_json(const QuantumState& s) {
    json rows = json::array();
    for (int i = 0; i < s.data.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < s.data.cols(); ++k) row.push_back({s.data(i, k).real(), s.data(i, k).imag()});
        rows.push_back(std::move(row));
    }
    return {{"kind", s.is_ket() ? "ket" : "density"}, {"dims", s.dims.factors}, {"data", std::move(rows)}};
}

QuantumState state_from(const json& j) {
    QuantumState s;
    s.kind = j.at("kind").get<std::string>() == "ket" ? QuantumState::Kind::Ket : QuantumState::Kind::Density;
    s.dims = Dims(j.at("dims").get<std::vector<int>>());
    const json& rows = j.at("data");
    const int n = static_cast<int>(rows.size());
    const int m = n ? static_cast<int>(rows[0].size()) : 0;
    s.data.resize(n, m);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < m; ++k) s.data(i, k) = cplx(rows[i][k][0].get<double>(), rows[i][k][1].get<double>());
    return s;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace

void write_csv(const SweepResult& res, std::ostream& out) {
    out << "variable";
    for (const auto& n : res.names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < res.variable.size(); ++i) {
        out << g12(res.variable[i]);
        for (const auto& n : res.names) out << ',' << g12(res.expectations.at(n).at(i));
        out << '\n';
    }
}

std::string to_csv(const SweepResult& res) {
    std::ostringstream ss;
    write_csv(res, ss);
    return ss.str();
}

std::string to_json(const SweepResult& res) {
    json j;
    j["variable_name"] = res.variable_name;
    j["names"] = res.names;
    json var = json::array();
    for (double v : res.variable) var.push_back(num(v));
    j["variable"] = std::move(var);
    json ex = json::object();
    for (const auto& n : res.names) {
        json col = json::array();
        for (double v : res.expectations.at(n)) col.push_back(num(v));
        ex[n] = std::move(col);
    }
    j["expectations"] = std::move(ex);
    json fails = json::array();
    for (const auto& f : res.failures) fails.push_back({{"index", f.index}, {"message", f.message}, {"solver", f.solver}});
    j["failures"] = std::move(fails);
    json segs = json::array();
    for (const auto& s : res.meta.segment_steps) segs.push_back(stats_json(s));
    j["metadata"] = {{"scenario", res.meta.scenario},
                     {"config_hash", res.meta.config_hash},
                     {"seed", res.meta.seed},
                     {"atol", res.meta.atol},
                     {"rtol", res.meta.rtol},
                     {"steps", stats_json(res.meta.steps)},
                     {"segment_steps", std::move(segs)},
                     {"warnings", res.meta.warnings}};
    if (!res.final_states.empty()) {
        json st = json::array();
        for (const auto& s : res.final_states) st.push_back(state_json(s));
        j["final_states"] = std::move(st);
    }
    return j.dump(1) + "\n";
}

SweepResult result_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("result json: ") + e.what());
    }
    SweepResult r;
    r.variable_name = j.at("variable_name").get<std::string>();
    r.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& v : j.at("variable")) r.variable.push_back(num(v));
    for (const auto& n : r.names) {
        auto& col = r.expectations[n];
        for (const auto& v : j.at("expectations").at(n)) col.push_back(num(v));
    }
    for (const auto& f : j.at("failures"))
        r.failures.push_back({f.at("index").get<std::size_t>(), f.at("message").get<std::string>(),
                              f.at("solver").get<bool>()});
    const json& m = j.at("metadata");
    r.meta.scenario = m.at("scenario").get<std::string>();
    r.meta.config_hash = m.at("config_hash").get<std::string>();
    r.meta.seed = m.at("seed").get<std::uint64_t>();
    r.meta.atol = m.at("atol").get<double>();
    r.meta.rtol = m.at("rtol").get<double>();
    r.meta.steps = stats_from(m.at("steps"));
    for (const auto& s : m.at("segment_steps")) r.meta.segment_steps.push_back(stats_from(s));
    r.meta.warnings = m.at("warnings").get<std::vector<std::string>>();
    if (j.contains("final_states"))
        for (const auto& s : j.at("final_states")) r.final_states.push_back(state_from(s));
    return r;
}

std::string write_result(const SweepResult& res, const std::string& format, const std::string& dir) {
    if (format != "csv" && format != "json") throw ValidationError("format must be csv or json");
    std::filesystem::create_directories(dir);
    std::string path = (std::filesystem::path(dir) / ("result." + format)).string();
    write_file(path, format == "csv" ? to_csv(res) : to_json(res));
    return path;
}

std::string to_json(const RunManifest& m) {
    json segs = json::array();
    for (const auto& s : m.segment_steps) segs.push_back(stats_json(s));
    json j = {{"engine_version", m.engine_version},
              {"scenario", m.scenario},
              {"config_hash", m.config_hash},
              {"seed", m.seed},
              {"wall_time", m.wall_time},
              {"workers", m.workers},
              {"status", m.status},
              {"error", m.error},
              {"steps", stats_json(m.steps)},
              {"segment_steps", std::move(segs)},
              {"warnings", m.warnings},
              {"failures", m.failures},
              {"outputs", m.outputs},
              {"effective_config", m.effective_config}};
    return j.dump(2) + "\n";
}

std::string write_manifest(const RunManifest& m, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string path = (std::filesystem::path(dir) / "manifest.json").string();
    write_file(path, to_json(m));
    return path;
}

}  // namespace nvtwin
