#include "nvtwin/adams.hpp"

#include <algorithm>
#include <cmath>

namespace nvtwin {

StepStats& StepStats::operator+=(const StepStats& o) {
    steps += o.steps;
    rejected += o.rejected;
    rhs_evals += o.rhs_evals;
    max_order = std::max(max_order, o.max_order);
    return *this;
}

namespace {

// 8-point Gauss-Legendre on [0, 1]; exact through degree 15.
constexpr double kGx[8] = {0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
                           0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
constexpr double kGw[8] = {0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918100,
                           0.18134189168918100, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};

constexpr int kCap = 14;

}  // namespace

void lagrange_weights(const double* x, int m, double* w) {
    double den[kCap + 1];
    for (int j = 0; j < m; ++j) {
        double d = 1.0;
        for (int i = 0; i < m; ++i)
            if (i != j) d *= x[j] - x[i];
        den[j] = d;
        w[j] = 0.0;
    }
    // Gauss nodes lie strictly inside (0, 1) and never coincide with an interpolation node
    for (int q = 0; q < 8; ++q) {
        double s = kGx[q], full = 1.0;
        for (int i = 0; i < m; ++i) full *= s - x[i];
        for (int j = 0; j < m; ++j) w[j] += kGw[q] * full / ((s - x[j]) * den[j]);
    }
}

AdamsIntegrator::AdamsIntegrator(Rhs f, SolverOptions opt, double h_max) : f_(std::move(f)), opt_(opt), h_max_(h_max) {
    opt_.validate();
    if (!(h_max_ > 0)) throw ValidationError("step cap must be > 0");
}

void AdamsIntegrator::integrate(double t0, double t1, Mat& y, const std::vector<double>& stops, const Observer& obs) {
    if (!(t1 > t0)) return;
    const int kmax = std::min(opt_.max_order, kCap - 2);
    std::vector<Mat> F(kCap);
    std::vector<double> T(kCap, t0);
    for (auto& m : F) m.resize(y.rows(), y.cols());
    Mat yp(y.rows(), y.cols()), yc(y.rows(), y.cols()), fp(y.rows(), y.cols()), diff(y.rows(), y.cols());

    const double atol = opt_.atol, rtol = opt_.rtol;
    auto wnorm = [&](const Mat& e, const Mat& a, const Mat& b) {
        return (e.array().abs() / (atol + rtol * a.array().abs().max(b.array().abs()))).maxCoeff();
    };

    f_(t0, y, F[0]);
    ++stats_.rhs_evals;
    int nh = 1, k = 1, at_order = 0, fails = 0;
    bool startup = true;
    double t = t0;
    double h = std::min(h_max_, t1 - t0);
    std::size_t si = 0;
    while (si < stops.size() && stops[si] <= t0) ++si;

    double x[kCap], b[3][kCap], c[3][kCap + 1], nodes[kCap + 1];
    double cached_x[kCap];
    int cached_k = -1, cached_kb = -1;
    long attempts = 0;
    const double eps_t = 1e-13 * std::max(1.0, std::abs(t1));

    while (t1 - t > eps_t) {
        if (++attempts > opt_.max_substeps)
            throw SolverError("step budget exhausted (max_substeps)", -1, t);
        double target = (si < stops.size() && stops[si] < t1) ? stops[si] : t1;
        double hs = std::min(h, target - t);
        bool truncated = hs < h;
        if (target - t - hs < 1e-12 * hs) hs = target - t;
        if (hs < 1e-14 * std::max(1.0, std::abs(t))) throw SolverError("step size underflow", -1, t);

        int kb = std::min(k + 1, nh);
        for (int j = 0; j < kb; ++j) x[j] = (T[j] - t) / hs;
        // orders k-1, k, k+1 in slots 0, 1, 2
        int qs[3] = {k - 1, k, k + 1};
        bool have[3] = {k - 1 >= 1, true, k + 1 <= nh && k + 1 <= kmax};
        bool same = k == cached_k && kb == cached_kb;
        for (int j = 0; same && j < kb; ++j) same = std::abs(x[j] - cached_x[j]) <= 1e-12 * (1.0 + std::abs(x[j]));
        if (!same) {
            for (int s = 0; s < 3; ++s) {
                if (!have[s]) continue;
                int q = qs[s];
                lagrange_weights(x, q, b[s]);
                nodes[0] = 1.0;
                for (int j = 0; j < q; ++j) nodes[j + 1] = x[j];
                lagrange_weights(nodes, q + 1, c[s]);
            }
            cached_k = k;
            cached_kb = kb;
            std::copy(x, x + kb, cached_x);
        }

        yp = y;
        for (int j = 0; j < k; ++j) yp.noalias() += (hs * b[1][j]) * F[j];
        f_(t + hs, yp, fp);
        ++stats_.rhs_evals;
        yc = y;
        yc.noalias() += (hs * c[1][0]) * fp;
        for (int j = 0; j < k; ++j) yc.noalias() += (hs * c[1][j + 1]) * F[j];

        double err[3] = {INFINITY, 0.0, INFINITY};
        diff = yc - yp;
        err[1] = wnorm(diff, y, yc);
        for (int s : {0, 2}) {
            if (!have[s]) continue;
            int q = qs[s];
            diff = (hs * c[s][0]) * fp;
            for (int j = 0; j < q; ++j) diff.noalias() += (hs * (c[s][j + 1] - b[s][j])) * F[j];
            err[s] = wnorm(diff, y, yc);
        }

        if (!(err[1] <= 1.0)) {
            ++stats_.rejected;
            ++fails;
            startup = false;
            double r = std::isfinite(err[1]) ? 0.9 * std::pow(err[1], -1.0 / (k + 1)) : 0.1;
            h = hs * std::clamp(r, 0.1, 0.9);
            if (have[0] && err[0] < err[1]) k = k - 1;
            if (fails >= 3) k = 1;
            at_order = 0;
            continue;
        }

        fails = 0;
        t = (hs == target - t) ? target : t + hs;
        y.swap(yc);
        std::rotate(F.begin(), F.end() - 1, F.end());
        std::rotate(T.begin(), T.end() - 1, T.end());
        f_(t, y, F[0]);
        T[0] = t;
        ++stats_.rhs_evals;
        ++stats_.steps;
        nh = std::min(nh + 1, kCap);
        stats_.max_order = std::max(stats_.max_order, k);
        ++at_order;
        if (si < stops.size() && t == stops[si]) {
            if (obs) obs(t, y);
            ++si;
        }

        auto ratio = [](double e, int q) { return 0.9 * std::pow(std::max(e, 1e-12), -1.0 / (q + 1)); };
        double r1 = ratio(err[1], k);
        int knew = k;
        double rbest = r1;
        if (startup || at_order >= k + 1) {
            if (have[0] && ratio(err[0], k - 1) > rbest) {
                rbest = ratio(err[0], k - 1);
                knew = k - 1;
            }
            if (have[2] && k + 1 <= std::min(kmax, nh) && ratio(err[2], k + 1) > 1.1 * rbest) {
                rbest = ratio(err[2], k + 1);
                knew = k + 1;
            }
        }
        if (knew != k) at_order = 0;
        if (have[2] && knew <= k) startup = false;
        k = knew;
        double g = std::clamp(rbest, 0.2, 2.0);
        if (truncated && err[1] <= 0.5)
            h = std::min(h, h_max_);
        else if (g >= 0.9 && g < 1.3 && knew == qs[1])
            h = std::min(h_max_, hs);  // small suggested change: keep the node spacing
        else
            h = std::min(h_max_, hs * g);
    }
    while (si < stops.size()) {
        if (obs && std::abs(stops[si] - t1) <= eps_t) obs(t1, y);
        ++si;
    }
}

}  // namespace nvtwin
