#pragma once

// Residual minimization for the KW systems (Levenberg-Marquardt over
// Gauss-Newton normal equations, spectral preconditioning, backtracked steps)
// and the metric heat flow for Hermitian-Yang-Mills / pluri-harmonic metrics
// (moment-map defect flow, Lawson integrating-factor RK4 on the stiff
// Laplacian part, defect-norm backtracking).

#include "kwlab/hodge.hpp"

namespace kwlab {

enum class StepPolicy { fixed, backtracking };

struct SolveConfig {
    int max_iters = 500;
    double tol = 1e-10;          // target residual total (sum of squared norms)
    StepPolicy policy = StepPolicy::backtracking;
    std::uint64_t seed = 0;
    int bandwidth_cap = 0;       // 0 = N/3; must stay <= N/3
    int report_cadence = 1;
    // numerical knobs
    double fixed_step = 5e-3;    // for StepPolicy::fixed
    int cg_max_iters = 60;
    bool fd_check = true;        // validate the gradient at iteration 0

    int effective_band(const TorusLattice& lat) const {
        int cap = bandwidth_cap > 0 ? bandwidth_cap : lat.n / 3;
        require(cap <= lat.n / 3, "bandwidth cap must be <= N/3");
        return cap;
    }
};

struct FlowTraceRow {
    int iter = 0;
    double residual = 0.0;  // system residual total (or defect norm for flows)
    double energy = 0.0;    // objective value
    double step = 0.0;      // accepted step scale / time step
    double millis = 0.0;    // wall clock for the iteration
};
using FlowTrace = std::vector<FlowTraceRow>;

struct MinimizeResult {
    FieldVec x;
    FlowTrace trace;
    bool converged = false;
    bool diverged = false;
    std::string message;
    double final_total = 0.0;
    double fd_max_rel_err = -1.0;  // gradient-vs-FD validation at iteration 0
    int iterations = 0;
};

// Deterministic default seeding: random band-limited fields of amplitude 0.1.
FieldVec default_seed(const TorusLattice& lat, const GaugeGroup& g, KWSystem sys,
                      const SolveConfig& sc);

MinimizeResult minimize_kw(const KwLeastSquares& sys, const FieldVec& x0,
                           const SolveConfig& sc);

enum class FlowTarget { hym, pluriharmonic };

struct HeatFlowResult {
    MetricField H;
    FlowTrace trace;
    bool converged = false;
    bool aborted = false;
    std::string message;
    double final_defect = 0.0;     // target block L2 norm at the final metric
    double fd_descent_slope = 0.0; // central-FD slope of |defect|^2 along the flow
    int iterations = 0;
};

// Target block norms at a given metric (also used by the fixed-point tests).
double hym_defect_norm(const HiggsPair& p, const FormField& H);
double pluriharmonic_defect_norm(const HiggsPair& p, const FormField& H);

HeatFlowResult metric_heat_flow(const HiggsPair& p, FlowTarget target,
                                const SolveConfig& sc,
                                const MetricField* seed = nullptr);

}  // namespace kwlab
