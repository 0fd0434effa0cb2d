// Acceptance gate: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is 0 only when the failing set equals kExpectedFailures exactly.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nvtwin/output.hpp"
#include "nvtwin/runner.hpp"

using namespace nvtwin;

namespace {

// Criteria that fail with the stated parameters; the analysis is kept in the project notes.
const std::set<int> kExpectedFailures = {4, 5, 7};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string outdir = "acceptance_out";

void save(const SweepResult& r, const std::string& name) {
    std::filesystem::create_directories(outdir);
    std::ofstream(std::filesystem::path(outdir) / (name + ".csv")) << to_csv(r);
}

std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

ScenarioConfig config(const std::string& id, std::optional<SweepSpec> sweep = {}) {
    ScenarioConfig c;
    c.scenario = id;
    c.sequence.sweep = sweep;
    c.seed = 42;
    return c;
}

const std::vector<double>& col(const SweepResult& r, const std::string& n) { return r.expectations.at(n); }

// ---- signal analysis ----

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Peak {
    double f, mag;
};

// Local maxima of the Hann-windowed DFT magnitude of y - mean(y) on [fmin, fmax], strongest first.
std::vector<Peak> spectral_peaks(const std::vector<double>& t, const std::vector<double>& y, double fmin, double fmax,
                                 double df) {
    const std::size_t n = y.size();
    double mean = 0;
    for (double v : y) mean += v / n;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = (y[i] - mean) * (0.5 - 0.5 * std::cos(kTwoPi * i / (n - 1)));
    std::vector<double> fs, mags;
    for (double f = fmin; f <= fmax; f += df) {
        cplx s = 0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * std::exp(cplx(0, -kTwoPi * f * t[i]));
        fs.push_back(f);
        mags.push_back(std::abs(s));
    }
    std::vector<Peak> peaks;
    for (std::size_t k = 1; k + 1 < fs.size(); ++k)
        if (mags[k] > mags[k - 1] && mags[k] >= mags[k + 1]) peaks.push_back({fs[k], mags[k]});
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.mag > b.mag; });
    return peaks;
}

// Times where y crosses `level`, linearly interpolated.
std::vector<double> crossings(const std::vector<double>& t, const std::vector<double>& y, double level) {
    std::vector<double> out;
    for (std::size_t i = 1; i < y.size(); ++i) {
        double a = y[i - 1] - level, b = y[i] - level;
        if ((a < 0) != (b < 0)) out.push_back(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
    }
    return out;
}

double contrast(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] <= t1) {
            lo = std::min(lo, y[i]);
            hi = std::max(hi, y[i]);
        }
    return hi - lo;
}

// ---- criteria ----

Verdict c1() {
    NVParams p;
    p.B0 = 200.0;
    QuantumSystem nv = build_nv(p);
    PulseSegment s;
    s.h1 = 20.0 * nv.mw_h1;
    s.duration = 1.0 / (2.0 * 20.0);
    s.f_pulse = transition_frequency(nv, {"0"}, {"-1"});
    const double F0 = expectation(nv.rho0, nv.observables.at("fluorescence"));
    EvolveResult r = evolve_pulse(nv.rho0, nv.H0, s, {}, nullptr, 0.0);
    const double F = expectation(r.state, nv.observables.at("fluorescence"));
    return {std::abs(F0 - 1.0) < 1e-12 && F <= 0.01, fmt("<F_S> 1 -> %.3e (limit 0.01)", F)};
}

Verdict c2() {
    auto gap = [](double B) {
        NVParams p;
        p.B0 = B;
        QuantumSystem s = build_nv(p);
        return level_energy(s, {"-1"}) - level_energy(s, {"0"});
    };
    double lo = 90.0, hi = 115.0;
    if (!(gap(lo) > 0 && gap(hi) < 0)) return {false, "no sign change of E(-1) - E(0) in [90, 115] mT"};
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (gap(mid) > 0 ? lo : hi) = mid;
    }
    const double Bc = 0.5 * (lo + hi);
    return {std::abs(Bc - 102.4) <= 0.5, fmt("crossing at %.4f mT (102.4 +- 0.5)", Bc)};
}

Verdict c3() {
    SweepResult e = run_config(config("rabi_electron", SweepSpec{0.0, 0.15, 200}));
    SweepResult n = run_config(config("rabi_nuclear", SweepSpec{0.0, 2.5, 200}));
    save(e, "c3_rabi_electron");
    save(n, "c3_rabi_nuclear");
    const auto& up = col(e, "carbon_up");
    double leak = 0;
    for (double u : up) leak = std::max(leak, std::abs(u - up.front()));
    const auto& F = col(e, "fluorescence");
    const double Fmin = *std::min_element(F.begin(), F.end());

    const auto& c = col(n, "carbon_up");
    auto x = crossings(n.variable, c, 0.5);
    double period = NAN;
    if (x.size() >= 2) period = 2.0 * (x.back() - x.front()) / (x.size() - 1);
    const double first = contrast(n.variable, c, 0.0, 1.25), last = contrast(n.variable, c, 1.25, 2.5);
    const bool damped = last < 0.9 * first;

    ScenarioConfig u = config("rabi_nuclear", SweepSpec{0.0, 2.5, 200});
    ConditionalGateSetup su = conditional_gates_setup(GateTarget::Nuclear, 200, false);
    SweepResult nu = rabi(su.sys, su.rabi);
    const auto& cu = col(nu, "carbon_up");
    const double uf = contrast(nu.variable, cu, 0.0, 1.25), ul = contrast(nu.variable, cu, 1.25, 2.5);

    bool ok = leak < 0.01 && Fmin <= 0.01 && std::abs(period - 1.25) <= 0.05 * 1.25 && damped &&
              std::abs(ul - uf) <= 0.02 * uf;
    char b[320];
    std::snprintf(b, sizeof b,
                  "electron: min F %.4f, leakage %.2e (< 0.01); nuclear: period %.4f us (1.25 +- 5%%), contrast "
                  "%.3f -> %.3f with dephasing, %.3f -> %.3f without",
                  Fmin, leak, period, first, last, uf, ul);
    return {ok, b};
}

Verdict c4() {
    SweepResult r = run_config(config("hahn", SweepSpec{0.04, 4.0, 500}));
    save(r, "c4_hahn");
    const auto& F = col(r, "fluorescence");
    DDSetup s = dd_setup(config("hahn"));
    CarbonFrequencies cf = carbon_frequencies(s.sys);
    const double slow_ref = constants::gamma_c13 * 4.2;
    auto peaks = spectral_peaks(r.variable, F, 0.02, 20.0, 0.0025);
    if (peaks.size() < 2) return {false, "fewer than two spectral peaks"};
    double a = std::min(peaks[0].f, peaks[1].f), b = std::max(peaks[0].f, peaks[1].f);
    bool ok_a = std::abs(a - slow_ref) <= 0.05 * slow_ref;
    bool ok_b = std::abs(b - cf.block1) <= 0.05 * cf.block1;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "two strongest lines %.4f and %.4f MHz; (a) slow vs gamma_c B0 = %.4f: %s; (b) fast vs m_S=+1 "
                  "block gap %.4f: %s",
                  a, b, slow_ref, ok_a ? "ok" : "off", cf.block1, ok_b ? "ok" : "off");
    return {ok_a && ok_b, buf};
}

Verdict c5() {
    std::vector<double> depth;
    double dip_tau = NAN;
    for (int M : {8, 16, 24, 32}) {
        ScenarioConfig c = config("cpmg", SweepSpec{16.74, 16.85, 50});
        c.sequence.M = M;
        SweepResult r = run_config(c);
        save(r, "c5_cpmg_M" + std::to_string(M));
        const auto& F = col(r, "fluorescence");
        auto mn = std::min_element(F.begin(), F.end());
        depth.push_back(*std::max_element(F.begin(), F.end()) - *mn);
        if (M == 16) dip_tau = r.variable[mn - F.begin()];
    }
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < depth.size(); ++i) {
        inc = inc && depth[i] >= depth[i - 1];
        dec = dec && depth[i] <= depth[i - 1];
    }
    const bool nonmono = !(inc || dec);
    const bool dip = depth[1] >= 0.05 && dip_tau >= 16.74 && dip_tau <= 16.85;
    char b[256];
    std::snprintf(b, sizeof b, "M=16 dip %.4f at %.4f us (>= 0.05); depths M=8,16,24,32: %.3f %.3f %.3f %.3f (%s)",
                  depth[1], dip_tau, depth[0], depth[1], depth[2], depth[3], nonmono ? "non-monotone" : "monotone");
    return {dip && nonmono, b};
}

struct DipStats {
    double baseline, sigma, tau_dip, depth0, spur34, spur54;
};

DipStats dip_stats(const SweepResult& r) {
    const auto& t = r.variable;
    const auto& F = col(r, "fluorescence");
    const double tau0 = 1.0 / (2.0 * 5.5);
    const double fracs[] = {0.5, 0.75, 1.0, 1.25, 1.5, 1.75};
    std::vector<double> base;
    for (std::size_t i = 0; i < t.size(); ++i) {
        bool near = false;
        for (double q : fracs) near = near || std::abs(t[i] - q * tau0) < 0.004;
        if (!near) base.push_back(F[i]);
    }
    DipStats d{};
    d.baseline = median(base);
    std::vector<double> dev;
    for (double v : base) dev.push_back(std::abs(v - d.baseline));
    d.sigma = 1.4826 * median(dev);
    auto local_min = [&](double c, double half) {
        double m = INFINITY;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (std::abs(t[i] - c) <= half) m = std::min(m, F[i]);
        return m;
    };
    std::size_t g = std::min_element(F.begin(), F.end()) - F.begin();
    double wsum = 0, tsum = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::abs(t[i] - t[g]) <= 0.005) {
            double w = std::max(0.0, d.baseline - F[i]);
            wsum += w;
            tsum += w * t[i];
        }
    d.tau_dip = wsum > 0 ? tsum / wsum : t[g];
    d.depth0 = d.baseline - local_min(tau0, 0.005);
    d.spur34 = d.baseline - local_min(0.75 * tau0, 0.0015);
    d.spur54 = d.baseline - local_min(1.25 * tau0, 0.0015);
    return d;
}

Verdict c6() {
    SweepResult x = run_config(config("xy8", SweepSpec{0.06, 0.17, 300}));
    save(x, "c6_xy8");
    SweepResult rx = run_config(config("rxy8", SweepSpec{0.06, 0.17, 300}));
    save(rx, "c6_rxy8");
    DipStats a = dip_stats(x), b = dip_stats(rx);
    const double tau0 = 1.0 / (2.0 * 5.5);
    const bool at_tau0 = std::abs(a.tau_dip - tau0) <= 0.002;
    const bool spurious = a.spur34 > 3 * a.sigma && a.spur54 > 3 * a.sigma;
    const bool suppressed = b.spur34 <= 0.5 * a.spur34 && b.spur54 <= 0.5 * a.spur54;
    const bool kept = std::abs(b.depth0 - a.depth0) < 0.2 * a.depth0;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "XY8 dip centre %.4f us (0.0909 +- 0.002), depth %.3f; spurious 3/4: %.3f, 5/4: %.3f vs 3 sigma "
                  "%.3f; RXY8 spurious %.3f, %.3f (<= 50%%), depth %.3f (change < 20%%)",
                  a.tau_dip, a.depth0, a.spur34, a.spur54, 3 * a.sigma, b.spur34, b.spur54, b.depth0);
    return {at_tau0 && spurious && suppressed && kept, buf};
}

Verdict c7() {
    Table1 t = table1_report();
    bool within = true, floor = true;
    double worst = 0;
    double mean[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int b = 0; b < 4; ++b) {
            double f = t.fidelity[i][b];
            worst = std::max(worst, std::abs(f - kTable1Reference[i][b]));
            within = within && std::abs(f - kTable1Reference[i][b]) <= 0.02;
            floor = floor && f >= 0.94;
            mean[i] += f / 4;
        }
    const bool z_best = mean[2] > mean[0] && mean[2] > mean[1];
    SweepResult r;
    r.variable_name = "row";
    r.names = {"F00", "F01", "F10", "F11"};
    for (int i = 0; i < 3; ++i) {
        r.variable.push_back(i);
        for (int b = 0; b < 4; ++b) r.expectations[r.names[b]].push_back(t.fidelity[i][b]);
    }
    save(r, "c7_table1");
    std::string grid;
    const char* rows[3] = {"+X", "+Y", "+Z"};
    for (int i = 0; i < 3; ++i) {
        grid += std::string(" ") + rows[i] + ":";
        for (int b = 0; b < 4; ++b) grid += fmt(" %.4f", t.fidelity[i][b]);
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "; max |dF| %.4f (<= 0.02), all >= 0.94: %s, +Z mean greatest: %s", worst,
                  floor ? "yes" : "no", z_best ? "yes" : "no");
    return {within && floor && z_best, grid + buf};
}

Verdict c8() {
    struct Case {
        std::string id;
        std::optional<SweepSpec> sweep;
        std::optional<int> M;
    };
    const std::vector<Case> cases = {{"rabi_electron", SweepSpec{0.0, 0.15, 20}, {}},
                                     {"rabi_nuclear", SweepSpec{0.0, 2.5, 8}, {}},
                                     {"hahn", SweepSpec{0.04, 4.0, 10}, {}},
                                     {"cpmg", SweepSpec{16.74, 16.85, 6}, {}},
                                     {"xy8", SweepSpec{0.06, 0.17, 4}, {}},
                                     {"rxy8", SweepSpec{0.06, 0.17, 4}, {}},
                                     {"teleportation", {}, {}}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        ScenarioConfig cfg = config(c.id, c.sweep);
        cfg.sequence.M = c.M;
        OracleReport rep = oracle_check(cfg);
        ok = ok && rep.max_distance < 1e-6 && rep.invariant_violations.empty();
        detail += " " + c.id + fmt(" %.1e", rep.max_distance);
        for (const auto& v : rep.invariant_violations) detail += " [" + v + "]";
    }
    return {ok, "max trace distance (< 1e-6):" + detail};
}

Verdict c9() {
    struct Case {
        std::string id;
        std::optional<SweepSpec> sweep;
    };
    const std::vector<Case> cases = {{"rabi_electron", SweepSpec{0.0, 0.15, 20}},
                                     {"rabi_nuclear", SweepSpec{0.0, 2.5, 20}},
                                     {"hahn", SweepSpec{0.04, 4.0, 12}},
                                     {"cpmg", SweepSpec{16.74, 16.85, 8}},
                                     {"xy8", SweepSpec{0.06, 0.17, 6}},
                                     {"rxy8", SweepSpec{0.06, 0.17, 6}},
                                     {"teleportation", {}}};
    bool ok = true;
    std::string bad;
    auto twice = [&](ScenarioConfig c, const std::string& name) {
        c.keep_states = true;
        c.workers = 1;
        SweepResult a = run_config(c);
        c.workers = 2;
        SweepResult b = run_config(c);
        const bool same = to_csv(a) == to_csv(b) && to_json(a) == to_json(b);
        if (!same) bad += " " + name;
        ok = ok && same;
        std::filesystem::create_directories(std::filesystem::path(outdir) / "c9");
        std::ofstream(std::filesystem::path(outdir) / "c9" / (name + ".json")) << to_json(a);
    };
    for (const auto& c : cases) twice(config(c.id, c.sweep), c.id);
    ScenarioConfig s = config("teleportation");
    s.teleportation.mode = "sample";
    twice(s, "teleportation_sampled");
    return {ok, ok ? "CSV and JSON payloads identical across repeated runs (1 and 2 workers)"
                   : "payload differs for:" + bad};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    app.add_option("--outdir", outdir, "directory for result files");
    app.add_option("--only", only, "run a subset of criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Verdict()>>> all = {
        {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9}};
    std::set<int> failed, ran;
    for (const auto& [id, fn] : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        ran.insert(id);
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) failed.insert(id);
        const char* tag = v.pass ? "PASS" : (kExpectedFailures.count(id) ? "FAIL (expected)" : "FAIL");
        std::printf("[%s] criterion %d (%.1f s): %s\n", tag, id, dt, v.detail.c_str());
        std::fflush(stdout);
    }
    std::set<int> expected;
    for (int id : kExpectedFailures)
        if (ran.count(id)) expected.insert(id);
    for (int id : expected)
        if (!failed.count(id)) std::printf("criterion %d now passes; update the expected-failure list\n", id);
    return failed == expected ? 0 : 1;
}
