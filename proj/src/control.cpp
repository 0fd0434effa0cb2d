#include "nvtwin/control.hpp"

#include <cmath>

#include "nvtwin/spinalg.hpp"

namespace nvtwin {

void SolverOptions::validate() const {
    if (!(atol > 0) || !(rtol > 0)) throw ValidationError("solver tolerances must be > 0");
    if (max_substeps < 1) throw ValidationError("max_substeps must be >= 1");
    if (max_order < 1 || max_order > 12) throw ValidationError("order cap must lie in [1, 12]");
}

double EnvelopeSpec::operator()(double s) const {
    if (kind == Kind::User) return fn ? fn(s) : 0.0;
    return (s >= 0.0 && s < 1.0) ? 1.0 : 0.0;
}

void PulseSegment::validate() const {
    if (!(duration > 0)) throw ValidationError("pulse duration must be > 0");
    if (time_steps < 2) throw ValidationError("time_steps must be >= 2");
    if (!h1.is_hermitian(1e-10)) throw ValidationError("pulse h1 must be Hermitian");
    if (!std::isfinite(f_pulse) || !std::isfinite(phi_t)) throw ValidationError("pulse frequency and phase must be finite");
}

void ClassicalField::validate() const {
    if (!(amplitude >= 0)) throw ValidationError("classical field amplitude must be >= 0");
    if (!axis.is_hermitian(1e-10)) throw ValidationError("classical field axis must be Hermitian");
}

double drive_value(const PulseSegment& seg, double t_local, double t_start) {
    double env = seg.envelope(t_local / seg.duration);
    if (env == 0.0) return 0.0;
    return env * std::cos(kTwoPi * seg.f_pulse * (t_start + t_local) + seg.phi_t);
}

double sensing_value(const ClassicalField& f, double t_global) { return f.amplitude * std::sin(kTwoPi * f.omega2 * t_global); }

Mat TimeDependentHamiltonian::operator()(double t) const {
    Mat h = H0.data;
    if (pulse) h += drive_value(*pulse, t - t_start, t_start) * pulse->h1.data;
    if (field) h += sensing_value(*field, t) * field->axis.data;
    return h;
}

TimeDependentHamiltonian assemble_rhs(const Operator& H0, const PulseSegment* pulse, const ClassicalField* field,
                                      double t_start) {
    TimeDependentHamiltonian r;
    r.H0 = H0;
    r.t_start = t_start;
    if (pulse) {
        if (!(pulse->h1.dims == H0.dims)) throw ValidationError("pulse h1 dims do not match H0");
        if (max_abs(pulse->h1.data) > 0) {
            r.pulse = pulse;
            r.f_max = std::max(r.f_max, std::abs(pulse->f_pulse));
        }
    }
    if (field) {
        if (!(field->axis.dims == H0.dims)) throw ValidationError("field axis dims do not match H0");
        if (field->amplitude > 0 && max_abs(field->axis.data) > 0) {
            r.field = field;
            r.f_max = std::max(r.f_max, std::abs(field->omega2));
        }
    }
    r.time_independent = (r.pulse == nullptr && r.field == nullptr);
    return r;
}

}  // namespace nvtwin
