#include "nvtwin/oracle.hpp"

#include <cmath>

#include "nvtwin/spinalg.hpp"

namespace nvtwin {

namespace {

struct Gen {
    bool density;
    std::vector<std::pair<Mat, double>> cops;  // C, rate
    std::vector<Mat> ckc;                      // C^dag C

    // -2 pi i [H, X] + dissipator, or -2 pi i H X for state columns
    Mat apply(const Mat& H, const Mat& X, double scale_d) const {
        if (!density) return cplx(0, -kTwoPi) * (H * X);
        Mat hx = H * X;
        Mat out = cplx(0, -kTwoPi) * (hx - hx.adjoint());
        for (std::size_t q = 0; q < cops.size(); ++q) {
            const Mat& c = cops[q].first;
            Mat kx = ckc[q] * X;
            out += (scale_d * kTwoPi * cops[q].second) * (c * X * c.adjoint() - 0.5 * (kx + kx.adjoint()));
        }
        return out;
    }
};

// exp(dt * G_H) applied to X by Taylor series; dissipator weighted by `wd`.
void taylor_step(const Gen& g, const Mat& H, double dt, double wd, Mat& X) {
    Mat term = X;
    Mat acc = X;
    for (int k = 1; k < 40; ++k) {
        term = g.apply(H, term, wd) * (dt / k);
        acc += term;
        if (max_abs(term) < 1e-18) break;
    }
    X = acc;
}

double spread(const Operator& H0) {
    EigenDecomp e = eig_hermitian(H0);
    return e.values(e.values.size() - 1) - e.values(0);
}

QuantumState run(const QuantumState& state, const Operator& H0, double duration, const PulseSegment* seg,
                 const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                 const OracleOptions& opt) {
    Gen g;
    for (const auto& l : lindblad)
        if (l.rate > 0) {
            g.cops.push_back({l.c_op.data, l.rate});
            g.ckc.push_back(l.c_op.data.adjoint() * l.c_op.data);
        }
    const bool rho_form = !state.is_ket() || !g.cops.empty();
    g.density = rho_form;
    Mat X = rho_form ? state.as_density() : state.data;

    const bool driven = seg && max_abs(seg->h1.data) > 0;
    const bool fielded = field && field->amplitude > 0 && max_abs(field->axis.data) > 0;
    if (!driven && !fielded && g.cops.empty()) {
        Mat U = expm_hermitian_prop(H0, duration).data;
        if (rho_form) return QuantumState::density(U * X * U.adjoint(), state.dims);
        return QuantumState::ket(U * X.col(0), state.dims);
    }

    double f_scale = spread(H0) + (driven ? std::abs(seg->f_pulse) : 0.0) + (fielded ? std::abs(field->omega2) : 0.0);
    long n = oracle_substeps(duration, f_scale, opt);
    double dt = duration / n;
    auto H = [&](double t) {
        Mat h = H0.data;
        if (driven) {
            double s = (t - t_start) / duration;
            h += seg->envelope(s) * std::cos(kTwoPi * seg->f_pulse * t + seg->phi_t) * seg->h1.data;
        }
        if (fielded) h += field->amplitude * std::sin(kTwoPi * field->omega2 * t) * field->axis.data;
        return h;
    };
    const double r3 = std::sqrt(3.0);
    const double c1 = 0.5 - r3 / 6, c2 = 0.5 + r3 / 6;
    const double a1 = 0.25 + r3 / 6, a2 = 0.25 - r3 / 6;
    for (long i = 0; i < n; ++i) {
        double t0 = t_start + i * dt;
        if (opt.scheme == OracleOptions::Scheme::Midpoint) {
            taylor_step(g, H(t0 + 0.5 * dt), dt, 1.0, X);
        } else {
            Mat h1 = H(t0 + c1 * dt), h2 = H(t0 + c2 * dt);
            // exp(dt (a2 A1 + a1 A2)) exp(dt (a1 A1 + a2 A2)); each factor carries half the dissipator
            taylor_step(g, Mat(2.0 * (a1 * h1 + a2 * h2)), 0.5 * dt, 1.0, X);
            taylor_step(g, Mat(2.0 * (a2 * h1 + a1 * h2)), 0.5 * dt, 1.0, X);
        }
    }
    if (rho_form) return QuantumState::density(0.5 * (X + X.adjoint()), state.dims);
    return QuantumState::ket(X.col(0), state.dims);
}

}  // namespace

long oracle_substeps(double duration, double f_scale, const OracleOptions& opt) {
    double want = std::ceil(opt.per_period * duration * f_scale);
    return std::max<long>(opt.min_substeps, static_cast<long>(want));
}

QuantumState oracle_pulse(const QuantumState& state, const Operator& H0, const PulseSegment& seg,
                          const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                          const OracleOptions& opt) {
    seg.validate();
    return run(state, H0, seg.duration, &seg, lindblad, field, t_start, opt);
}

QuantumState oracle_free(const QuantumState& state, const Operator& H0, double duration,
                         const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                         const OracleOptions& opt) {
    if (duration < 0) throw ValidationError("free evolution duration must be >= 0");
    if (duration == 0) return state;
    return run(state, H0, duration, nullptr, lindblad, field, t_start, opt);
}

}  // namespace nvtwin
