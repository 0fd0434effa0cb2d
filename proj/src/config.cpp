#include "nvtwin/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nvtwin/seeds.hpp"

namespace nvtwin {

namespace {

constexpr double kDeg = kPi / 180.0;

void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) throw ValidationError(path + ": " + msg);
}

bool is_rabi(const std::string& s) { return s == "rabi_electron" || s == "rabi_nuclear"; }

std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

class Parser {
public:
    explicit Parser(std::string source) : src_(std::move(source)) {}

    std::string where(const YAML::Mark& m) const {
        return src_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
    }

    void keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!n.IsMap()) throw ValidationError(where(n.Mark()) + ": " + (path.empty() ? "config" : path) + " must be a mapping");
        for (auto it = n.begin(); it != n.end(); ++it) {
            std::string k = it->first.as<std::string>();
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
                throw ValidationError(where(it->first.Mark()) + ": unknown key '" + k + "'" +
                                      (path.empty() ? "" : " in " + path));
            marks_[path.empty() ? k : path + "." + k] = it->second.Mark();
        }
    }

    template <class T>
    T get(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar()) throw ValidationError(where(n.Mark()) + ": " + path + " must be a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            throw ValidationError(where(n.Mark()) + ": " + path + " has the wrong type ('" + n.Scalar() + "')");
        }
    }

    template <class T>
    void opt(const YAML::Node& parent, const char* key, const std::string& prefix, std::optional<T>& out) {
        if (YAML::Node n = parent[key]) out = get<T>(n, prefix + key);
    }

    // Rewrites a "path: msg" validation error with the location of that path.
    [[noreturn]] void relocate(const ValidationError& e) const {
        std::string m = e.what();
        auto p = m.find(": ");
        if (p != std::string::npos) {
            auto it = marks_.find(m.substr(0, p));
            if (it != marks_.end()) throw ValidationError(where(it->second) + ": " + m);
        }
        throw ValidationError(src_ + ": " + m);
    }

private:
    std::string src_;
    std::map<std::string, YAML::Mark> marks_;
};

}  // namespace

SystemOverrides SystemSection::overrides() const {
    SystemOverrides o;
    o.B0 = B0;
    if (theta_deg) o.theta = *theta_deg * kDeg;
    o.isotope = isotope;
    o.n0 = n0;
    o.temperature = temperature;
    return o;
}

SolverOptions ScenarioConfig::solver() const {
    SolverOptions s;
    if (atol) s.atol = *atol;
    if (rtol) s.rtol = *rtol;
    return s;
}

void ScenarioConfig::validate() const {
    const auto ids = scenario_ids();
    check(std::find(ids.begin(), ids.end(), scenario) != ids.end(), "scenario",
          "unknown scenario '" + scenario + "' (see list-scenarios)");
    const bool tele = scenario == "teleportation";

    if (system.B0) check(std::isfinite(*system.B0) && *system.B0 >= 0, "system.B0", "must be >= 0");
    if (system.theta_deg) check(std::isfinite(*system.theta_deg), "system.theta", "must be finite");
    if (system.n0) check(*system.n0 >= 0 && *system.n0 <= 1, "system.n0", "must lie in [0, 1]");
    if (system.temperature)
        check(std::isfinite(*system.temperature) && *system.temperature > 0, "system.temperature", "must be > 0");
    if (tele) check(system.empty(), "system", "overrides are not supported for teleportation");
    if (is_rabi(scenario) && system.isotope)
        check(*system.isotope == Isotope::None, "system.isotope", "the conditional-gate scenarios have no nitrogen");

    const SequenceSection& q = sequence;
    if (q.sweep) {
        check(q.sweep->count >= 2, "sequence.sweep.count", "must be >= 2");
        check(std::isfinite(q.sweep->start) && std::isfinite(q.sweep->stop), "sequence.sweep", "bounds must be finite");
        check(q.sweep->stop > q.sweep->start, "sequence.sweep.stop", "must exceed start");
        if (is_rabi(scenario)) check(q.sweep->start >= 0, "sequence.sweep.start", "durations must be >= 0");
        else check(q.sweep->start > 0, "sequence.sweep.start", "tau must be > 0");
    }
    if (q.M) check(*q.M >= 1, "sequence.M", "must be >= 1");
    if (q.t_pi) check(std::isfinite(*q.t_pi) && *q.t_pi > 0, "sequence.t_pi", "must be > 0");
    if (q.w1) check(std::isfinite(*q.w1) && *q.w1 > 0, "sequence.w1", "must be > 0");
    if (q.f_pulse) check(std::isfinite(*q.f_pulse) && *q.f_pulse > 0, "sequence.f_pulse", "must be > 0");
    if (q.time_steps) check(*q.time_steps >= 2, "sequence.time_steps", "must be >= 2");
    if (tele)
        check(!q.sweep && !q.M && !q.t_pi && !q.w1 && !q.f_pulse && !q.time_steps, "sequence",
              "overrides are not supported for teleportation");
    if (is_rabi(scenario)) {
        check(!q.M, "sequence.M", "only applies to decoupling scenarios");
        check(!q.t_pi, "sequence.t_pi", "only applies to decoupling scenarios");
    }
    if (scenario == "hahn" && q.M) check(*q.M == 1, "sequence.M", "Hahn echo has a single pi pulse");

    const TeleportSection& t = teleportation;
    const bool any_t = t.input || t.c0 || t.c1 || t.mode;
    if (!tele) check(!any_t, "teleportation", "only applies to the teleportation scenario");
    if (t.input) check(*t.input == "+X" || *t.input == "+Y" || *t.input == "+Z", "teleportation.input",
                       "must be +X, +Y or +Z");
    if (t.c0) check(*t.c0 == 0 || *t.c0 == 1, "teleportation.c0", "must be 0 or 1");
    if (t.c1) check(*t.c1 == 0 || *t.c1 == 1, "teleportation.c1", "must be 0 or 1");
    check(t.c0.has_value() == t.c1.has_value(), "teleportation", "c0 and c1 must be given together");
    if (t.mode) {
        check(*t.mode == "branches" || *t.mode == "sample", "teleportation.mode", "must be branches or sample");
        check(!(*t.mode == "sample" && t.c0), "teleportation.mode", "sample conflicts with forced outcomes");
    }

    if (atol) check(std::isfinite(*atol) && *atol > 0, "solver.atol", "must be > 0");
    if (rtol) check(std::isfinite(*rtol) && *rtol > 0, "solver.rtol", "must be > 0");
    check(workers >= 0, "workers", "must be >= 0");
    check(format == "csv" || format == "json", "format", "must be csv or json");
    check(!output.empty(), "output", "must not be empty");
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    Parser ps(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ValidationError(ps.where(e.mark) + ": parse error: " + e.msg);
    }
    if (!root || root.IsNull()) throw ValidationError(source + ": empty config");
    ps.keys(root, "",
            {"scenario", "system", "sequence", "solver", "teleportation", "seed", "workers", "output", "format",
             "keep_states"});

    ScenarioConfig c;
    if (!root["scenario"]) throw ValidationError(ps.where(root.Mark()) + ": missing required key 'scenario'");
    c.scenario = ps.get<std::string>(root["scenario"], "scenario");
    if (YAML::Node n = root["seed"]) c.seed = ps.get<std::uint64_t>(n, "seed");
    if (YAML::Node n = root["workers"]) c.workers = ps.get<int>(n, "workers");
    if (YAML::Node n = root["output"]) c.output = ps.get<std::string>(n, "output");
    if (YAML::Node n = root["format"]) c.format = ps.get<std::string>(n, "format");
    if (YAML::Node n = root["keep_states"]) c.keep_states = ps.get<bool>(n, "keep_states");

    if (YAML::Node s = root["system"]) {
        ps.keys(s, "system", {"B0", "theta", "isotope", "n0", "temperature"});
        ps.opt(s, "B0", "system.", c.system.B0);
        ps.opt(s, "theta", "system.", c.system.theta_deg);
        ps.opt(s, "n0", "system.", c.system.n0);
        ps.opt(s, "temperature", "system.", c.system.temperature);
        if (YAML::Node n = s["isotope"]) {
            try {
                c.system.isotope = parse_isotope(ps.get<std::string>(n, "system.isotope"));
            } catch (const ValidationError& e) {
                throw ValidationError(ps.where(n.Mark()) + ": system.isotope: " + e.what());
            }
        }
    }
    if (YAML::Node s = root["sequence"]) {
        ps.keys(s, "sequence", {"sweep", "M", "t_pi", "w1", "f_pulse", "time_steps"});
        if (YAML::Node w = s["sweep"]) {
            ps.keys(w, "sequence.sweep", {"start", "stop", "count"});
            for (const char* k : {"start", "stop", "count"})
                if (!w[k])
                    throw ValidationError(ps.where(w.Mark()) + ": sequence.sweep: missing '" + std::string(k) + "'");
            c.sequence.sweep = SweepSpec{ps.get<double>(w["start"], "sequence.sweep.start"),
                                         ps.get<double>(w["stop"], "sequence.sweep.stop"),
                                         ps.get<int>(w["count"], "sequence.sweep.count")};
        }
        ps.opt(s, "M", "sequence.", c.sequence.M);
        ps.opt(s, "t_pi", "sequence.", c.sequence.t_pi);
        ps.opt(s, "w1", "sequence.", c.sequence.w1);
        ps.opt(s, "f_pulse", "sequence.", c.sequence.f_pulse);
        ps.opt(s, "time_steps", "sequence.", c.sequence.time_steps);
    }
    if (YAML::Node s = root["solver"]) {
        ps.keys(s, "solver", {"atol", "rtol"});
        ps.opt(s, "atol", "solver.", c.atol);
        ps.opt(s, "rtol", "solver.", c.rtol);
    }
    if (YAML::Node s = root["teleportation"]) {
        ps.keys(s, "teleportation", {"input", "c0", "c1", "mode"});
        ps.opt(s, "input", "teleportation.", c.teleportation.input);
        ps.opt(s, "c0", "teleportation.", c.teleportation.c0);
        ps.opt(s, "c1", "teleportation.", c.teleportation.c1);
        ps.opt(s, "mode", "teleportation.", c.teleportation.mode);
    }

    try {
        c.validate();
    } catch (const ValidationError& e) {
        ps.relocate(e);
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string to_yaml(const ScenarioConfig& c) {
    YAML::Emitter e;
    auto num_kv = [&](const char* k, const std::optional<double>& v) {
        if (v) e << YAML::Key << k << YAML::Value << num(*v);
    };
    auto int_kv = [&](const char* k, const std::optional<int>& v) {
        if (v) e << YAML::Key << k << YAML::Value << *v;
    };
    e << YAML::BeginMap;
    e << YAML::Key << "scenario" << YAML::Value << c.scenario;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "workers" << YAML::Value << c.workers;
    e << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;
    e << YAML::Key << "format" << YAML::Value << c.format;
    e << YAML::Key << "keep_states" << YAML::Value << c.keep_states;
    if (!c.system.empty()) {
        e << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
        num_kv("B0", c.system.B0);
        num_kv("theta", c.system.theta_deg);
        if (c.system.isotope) e << YAML::Key << "isotope" << YAML::Value << to_string(*c.system.isotope);
        num_kv("n0", c.system.n0);
        num_kv("temperature", c.system.temperature);
        e << YAML::EndMap;
    }
    const SequenceSection& q = c.sequence;
    if (q.sweep || q.M || q.t_pi || q.w1 || q.f_pulse || q.time_steps) {
        e << YAML::Key << "sequence" << YAML::Value << YAML::BeginMap;
        if (q.sweep) {
            e << YAML::Key << "sweep" << YAML::Value << YAML::Flow << YAML::BeginMap;
            e << YAML::Key << "start" << YAML::Value << num(q.sweep->start);
            e << YAML::Key << "stop" << YAML::Value << num(q.sweep->stop);
            e << YAML::Key << "count" << YAML::Value << q.sweep->count;
            e << YAML::EndMap;
        }
        int_kv("M", q.M);
        num_kv("t_pi", q.t_pi);
        num_kv("w1", q.w1);
        num_kv("f_pulse", q.f_pulse);
        int_kv("time_steps", q.time_steps);
        e << YAML::EndMap;
    }
    if (c.atol || c.rtol) {
        e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
        num_kv("atol", c.atol);
        num_kv("rtol", c.rtol);
        e << YAML::EndMap;
    }
    const TeleportSection& t = c.teleportation;
    if (t.input || t.c0 || t.c1 || t.mode) {
        e << YAML::Key << "teleportation" << YAML::Value << YAML::BeginMap;
        if (t.input) e << YAML::Key << "input" << YAML::Value << YAML::DoubleQuoted << *t.input;
        int_kv("c0", t.c0);
        int_kv("c1", t.c1);
        if (t.mode) e << YAML::Key << "mode" << YAML::Value << *t.mode;
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string config_hash(const ScenarioConfig& c) {
    ScenarioConfig k = c;
    k.output = "-";
    k.workers = 0;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_yaml(k))));
    return buf;
}

}  // namespace nvtwin
