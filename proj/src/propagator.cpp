#include "nvtwin/propagator.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "nvtwin/seeds.hpp"

namespace nvtwin {

Engine::Engine(const Operator& H0, const std::vector<LindbladTerm>& lindblad, SolverOptions opt)
    : dims_(H0.dims), opt_(opt) {
    opt_.validate();
    EigenDecomp e = eig_hermitian(H0);
    E_ = e.values;
    V_ = e.vectors;
    for (const auto& l : lindblad) {
        if (l.rate < 0) throw ValidationError("Lindblad rate must be >= 0");
        if (!(l.c_op.dims == H0.dims)) throw ValidationError("collapse operator dims do not match H0");
        if (l.rate == 0.0 || max_abs(l.c_op.data) == 0.0) continue;
        Mat c = to_eigen(l.c_op.data);
        cops_.push_back({c, c.adjoint() * c, l.rate});
        for (const Mat* m : {&cops_.back().c, &cops_.back().k}) {
            const double cut = 1e-12 * max_abs(*m);
            for (Eigen::Index i = 0; i < m->rows(); ++i)
                for (Eigen::Index j = 0; j < m->cols(); ++j)
                    if (std::abs((*m)(i, j)) > cut) cop_fmax_ = std::max(cop_fmax_, std::abs(E_(i) - E_(j)));
        }
    }
}

// rho <- exp(L t) rho for the time-independent Lindbladian, eigenbasis, column-stacked vec.
void Engine::dissipate_exact(State& s, double duration) const {
    const Eigen::Index n = E_.size(), n2 = n * n;
    const Mat I = Mat::Identity(n, n);
    auto kron = [&](const Mat& a, const Mat& b) {
        Mat k(n2, n2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) k.block(i * n, j * n, n, n) = a(i, j) * b;
        return k;
    };
    Mat L = Mat::Zero(n2, n2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) L(j * n + i, j * n + i) = cplx(0, -kTwoPi * (E_(i) - E_(j)));
    for (const auto& c : cops_)
        L += (kTwoPi * c.rate) * (kron(c.c.conjugate(), c.c) - 0.5 * kron(I, c.k) - 0.5 * kron(c.k.transpose(), I));
    Mat P = (L * duration).exp();
    Vec v = Eigen::Map<const Vec>(s.m.data(), n2);
    Vec w = P * v;
    s.m = Eigen::Map<const Mat>(w.data(), n, n);
    s.m = 0.5 * (s.m + s.m.adjoint()).eval();
}

Engine::State Engine::load(const QuantumState& s) const {
    if (s.n() != dims_.total()) throw ValidationError("state dims do not match the Hamiltonian");
    State st;
    if (s.is_ket()) {
        st.from_ket = true;
        if (dissipative()) {
            st.factored = false;
            Vec v = V_.adjoint() * s.data;
            st.m = v * v.adjoint();
        } else {
            st.m = V_.adjoint() * s.data;
        }
        return st;
    }
    if (dissipative()) {
        st.factored = false;
        st.m = to_eigen(s.data);
        return st;
    }
    EigenDecomp e = eig_hermitian(Mat(0.5 * (s.data + s.data.adjoint())));
    int r = 0;
    for (Eigen::Index k = 0; k < e.values.size(); ++k)
        if (e.values(k) > 1e-14) ++r;
    Mat psi(s.n(), std::max(r, 1));
    psi.setZero();
    int c = 0;
    for (Eigen::Index k = 0; k < e.values.size(); ++k)
        if (e.values(k) > 1e-14) psi.col(c++) = std::sqrt(e.values(k)) * e.vectors.col(k);
    st.m = V_.adjoint() * psi;
    return st;
}

QuantumState Engine::unload(const State& s) const {
    if (s.factored) {
        Mat psi = V_ * s.m;
        if (s.from_ket && psi.cols() == 1) return QuantumState::ket(psi.col(0), dims_);
        return QuantumState::density(psi * psi.adjoint(), dims_);
    }
    Mat rho = V_ * s.m * V_.adjoint();
    return QuantumState::density(0.5 * (rho + rho.adjoint()), dims_);
}

double Engine::expect(const State& s, const Mat& o) const {
    cplx v = s.factored ? (s.m.adjoint() * o * s.m).trace() : (o * s.m).trace();
    return v.real();
}

double Engine::branch_probability(const State& s, const Mat& p) const {
    double v = expect(s, p);
    return std::clamp(v, 0.0, 1.0);
}

namespace {

MeasureOutcome project(bool factored, Mat& m, const Mat& p, const MeasureMode& mode) {
    if (max_abs(p * p - p) > 1e-10 || hermiticity_error(p) > 1e-10)
        throw ValidationError("measurement operator must be an orthogonal projector");
    cplx tr = factored ? (m.adjoint() * p * m).trace() : (p * m).trace();
    double p1 = std::clamp(tr.real(), 0.0, 1.0);
    int bit = mode.kind == MeasureMode::Kind::Forced ? mode.bit : (uniform01(mode.seed) < p1 ? 1 : 0);
    if (bit != 0 && bit != 1) throw ValidationError("forced outcome must be 0 or 1");
    double pb = bit ? p1 : 1.0 - p1;
    if (pb < 1e-12) throw ValidationError("measurement branch " + std::to_string(bit) + " has probability " + std::to_string(pb));
    Mat P = bit ? p : Mat(Mat::Identity(p.rows(), p.cols()) - p);
    if (factored)
        m = (P * m) / std::sqrt(pb);
    else
        m = (P * m * P) / pb;
    MeasureOutcome out;
    out.bit = bit;
    out.probability = pb;
    return out;
}

}  // namespace

MeasureOutcome Engine::measure(State& s, const Mat& p, const MeasureMode& mode) const {
    MeasureOutcome out = project(s.factored, s.m, p, mode);
    out.post_state = unload(s);
    return out;
}

double Engine::min_eigenvalue(const State& s) const {
    if (s.factored) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s.m + s.m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

StepStats Engine::pulse(State& s, const PulseSegment& seg, const ClassicalField* field, double t_start,
                        const std::vector<Mat>* record, std::vector<Sample>* samples, int segment_index) const {
    std::vector<double> stops;
    StopCallback cb;
    if (record && samples && !record->empty()) {
        Sample first{t_start, {}};
        for (const auto& o : *record) first.values.push_back(expect(s, o));
        samples->push_back(std::move(first));
        for (int i = 1; i < seg.time_steps; ++i) stops.push_back(seg.duration * i / (seg.time_steps - 1));
        stops.back() = seg.duration;
        cb = [&](std::size_t i, const State& st) {
            Sample smp{t_start + stops[i], {}};
            for (const auto& o : *record) smp.values.push_back(expect(st, o));
            samples->push_back(std::move(smp));
        };
    }
    return pulse_trajectory(s, seg, field, t_start, stops, cb, segment_index);
}

StepStats Engine::pulse_trajectory(State& s, const PulseSegment& seg, const ClassicalField* field, double t_start,
                                   const std::vector<double>& stops, const StopCallback& cb, int segment_index) const {
    seg.validate();
    for (std::size_t i = 0; i < stops.size(); ++i)
        if (!(stops[i] > 0 && stops[i] <= seg.duration) || (i > 0 && stops[i] <= stops[i - 1]))
            throw ValidationError("trajectory stops must be ascending inside (0, duration]");
    TimeDependentHamiltonian th =
        assemble_rhs(Operator(Mat::Zero(dims_.total(), dims_.total()), dims_), &seg, field, t_start);
    SolverOptions opt = seg.solver_opts.value_or(opt_);
    if (th.time_independent && !dissipative()) {
        // h1 vanishes: exact phases up to each stop
        double t = 0;
        for (std::size_t i = 0; i < stops.size(); ++i) {
            free(s, stops[i] - t, nullptr, t_start + t);
            t = stops[i];
            if (cb) cb(i, s);
        }
        free(s, seg.duration - t, nullptr, t_start + t);
        return {};
    }
    const double f = std::max(th.f_max, cop_fmax_);
    double h_max = f > 0 ? 1.0 / (20.0 * f) : seg.duration;
    return integrate(s, t_start, seg.duration, th.pulse, th.field, h_max, stops, cb, segment_index, opt);
}

StepStats Engine::free(State& s, double duration, const ClassicalField* field, double t_start, int segment_index) const {
    if (duration < 0) throw ValidationError("free evolution duration must be >= 0");
    if (duration == 0) return {};
    TimeDependentHamiltonian th =
        assemble_rhs(Operator(Mat::Zero(dims_.total(), dims_.total()), dims_), nullptr, field, t_start);
    if (th.time_independent && !dissipative()) {
        const Eigen::Index n = E_.size();
        Vec ph(n);
        for (Eigen::Index j = 0; j < n; ++j) ph(j) = std::polar(1.0, -kTwoPi * E_(j) * duration);
        if (s.factored)
            s.m = ph.asDiagonal() * s.m;
        else
            s.m = ph.asDiagonal() * s.m * ph.conjugate().asDiagonal();
        return {};
    }
    if (th.time_independent) {
        dissipate_exact(s, duration);
        return {};
    }
    const double f = std::max(th.f_max, cop_fmax_);
    double h_max = f > 0 ? 1.0 / (20.0 * f) : duration;
    return integrate(s, t_start, duration, nullptr, th.field, h_max, {}, {}, segment_index, opt_);
}

StepStats Engine::integrate(State& s, double t_start, double duration, const PulseSegment* seg,
                            const ClassicalField* field, double h_max, const std::vector<double>& stops,
                            const StopCallback& cb, int segment_index, const SolverOptions& opt) const {
    const Eigen::Index n = E_.size();
    Mat h1e, axe;
    if (seg) h1e = to_eigen(seg->h1.data);
    if (field) axe = to_eigen(field->axis.data);
    const std::size_t nc = cops_.size();
    std::vector<Mat> ci(nc), ki(nc);
    const double one_minus = std::nextafter(1.0, 0.0);
    Vec p(n);
    Mat PP(n, n), VI(n, n), W(n, n), Cy(n, n);
    auto phases = [&](double t) {
        for (Eigen::Index j = 0; j < n; ++j) p(j) = std::polar(1.0, kTwoPi * E_(j) * (t - t_start));
    };
    // V_I(t) = e^{iH0 tau} V(t) e^{-iH0 tau} in the eigenbasis
    auto build = [&](double t) {
        phases(t);
        PP.noalias() = p * p.adjoint();
        VI.setZero();
        if (seg) {
            double sl = std::min((t - t_start) / duration, one_minus);
            double d = seg->envelope(std::max(sl, 0.0)) * std::cos(kTwoPi * seg->f_pulse * t + seg->phi_t);
            VI += d * h1e;
        }
        if (field) VI += sensing_value(*field, t) * axe;
        VI = VI.cwiseProduct(PP);
    };
    const cplx mi(0.0, -kTwoPi);
    AdamsIntegrator::Rhs rhs;
    if (s.factored) {
        rhs = [&](double t, const Mat& y, Mat& dy) {
            build(t);
            dy.noalias() = mi * (VI * y);
        };
    } else {
        rhs = [&](double t, const Mat& y, Mat& dy) {
            build(t);
            W.noalias() = VI * y;
            dy = mi * (W - W.adjoint());
            for (std::size_t q = 0; q < nc; ++q) {
                ci[q] = cops_[q].c.cwiseProduct(PP);
                ki[q] = cops_[q].k.cwiseProduct(PP);
                Cy.noalias() = ci[q] * y;
                W.noalias() = ki[q] * y;
                dy.noalias() += (kTwoPi * cops_[q].rate) * (Cy * ci[q].adjoint() - 0.5 * (W + W.adjoint()));
            }
        };
    }

    auto lab_state = [&](double t, const Mat& y) {
        phases(t);
        State out = s;
        if (s.factored)
            out.m = p.conjugate().asDiagonal() * y;
        else
            out.m = p.conjugate().asDiagonal() * y * p.asDiagonal();
        return out;
    };

    std::vector<double> abs_stops;
    AdamsIntegrator::Observer obs;
    std::size_t next = 0;
    if (cb && !stops.empty()) {
        for (double x : stops) abs_stops.push_back(t_start + x);
        abs_stops.back() = std::min(abs_stops.back(), t_start + duration);
        obs = [&](double t, const Mat& y) { cb(next++, lab_state(t, y)); };
    }

    AdamsIntegrator integ(rhs, opt, h_max);
    Mat y = s.m;
    try {
        integ.integrate(t_start, t_start + duration, y, abs_stops, obs);
    } catch (const SolverError& e) {
        throw SolverError(std::string(e.what()) + " in segment " + std::to_string(segment_index) + " at t=" +
                              std::to_string(e.t_reached) + " us",
                          segment_index, e.t_reached);
    }
    s = lab_state(t_start + duration, y);
    return integ.stats();
}

EvolveResult evolve_pulse(const QuantumState& state, const Operator& H0, const PulseSegment& seg,
                          const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                          const std::vector<Operator>& record) {
    Engine eng(H0, lindblad, seg.solver_opts.value_or(SolverOptions{}));
    Engine::State st = eng.load(state);
    std::vector<Mat> rec;
    for (const auto& o : record) rec.push_back(eng.to_eigen(o.data));
    EvolveResult r;
    r.stats = eng.pulse(st, seg, field, t_start, &rec, &r.samples);
    r.state = eng.unload(st);
    r.t_end = t_start + seg.duration;
    return r;
}

QuantumState evolve_free(const QuantumState& state, const Operator& H0, double duration,
                         const std::vector<LindbladTerm>& lindblad, const ClassicalField* field, double t_start,
                         SolverOptions opt) {
    Engine eng(H0, lindblad, opt);
    Engine::State st = eng.load(state);
    eng.free(st, duration, field, t_start);
    return eng.unload(st);
}

double expectation(const QuantumState& state, const Operator& obs) {
    if (obs.n() != state.n()) throw ValidationError("observable dims do not match state");
    cplx v = state.is_ket() ? (state.data.adjoint() * obs.data * state.data)(0, 0) : (obs.data * state.data).trace();
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, max_abs(obs.data)))
        throw ValidationError("expectation value has an imaginary part; observable not Hermitian?");
    return v.real();
}

MeasureOutcome measure(const QuantumState& state, const Operator& projector, const MeasureMode& mode) {
    if (projector.n() != state.n()) throw ValidationError("projector dims do not match state");
    Mat m = state.data;
    MeasureOutcome out = project(state.is_ket(), m, projector.data, mode);
    out.post_state = state.is_ket() ? QuantumState::ket(m.col(0), state.dims) : QuantumState::density(m, state.dims);
    return out;
}

double uniform01(std::uint64_t seed) { return static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53; }

}  // namespace nvtwin
