#pragma once

#include <functional>
#include <vector>

#include "nvtwin/control.hpp"
#include "nvtwin/types.hpp"

namespace nvtwin {

struct StepStats {
    long steps = 0;
    long rejected = 0;
    long rhs_evals = 0;
    int max_order = 0;

    StepStats& operator+=(const StepStats& o);
};

// Variable-order variable-step Adams PECE on complex matrix states.
// Predictor AB(k), corrector AM(k+1), weights from Lagrange bases on the actual nodes.
class AdamsIntegrator {
public:
    using Rhs = std::function<void(double t, const Mat& y, Mat& dy)>;
    using Observer = std::function<void(double t, const Mat& y)>;

    AdamsIntegrator(Rhs f, SolverOptions opt, double h_max);

    // Advances y from t0 to t1. `stops` (ascending, inside (t0, t1]) are hit exactly and passed to `obs`.
    void integrate(double t0, double t1, Mat& y, const std::vector<double>& stops = {}, const Observer& obs = {});

    const StepStats& stats() const { return stats_; }

private:
    Rhs f_;
    SolverOptions opt_;
    double h_max_;
    StepStats stats_;
};

// Integral over s in [0, 1] of each Lagrange basis polynomial on `nodes`.
void lagrange_weights(const double* nodes, int m, double* w);

}  // namespace nvtwin
