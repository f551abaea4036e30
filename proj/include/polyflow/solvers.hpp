#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "polyflow/solvers_types.hpp"
#include "polyflow/water_levels.hpp"

namespace polyflow {

// Exponential pricing profile used by every solver.
inline double price_g(double z) { return std::exp(z - 1.0); }
// G(z) = integral of g from 0 to z.
inline double price_G(double z) { return std::exp(z - 1.0) - std::exp(-1.0); }

struct Allocation {
    std::vector<double> x;
    int revealed_parts = 0;
};

struct DualCertificate {
    std::vector<double> gamma;  // per element
    std::vector<double> beta;   // per part
};

struct TraceRow {
    long step;
    int part;
    int element;
    double delta;
    double primal;
    double dual;
    double min_kappa;
};

struct SolveReport {
    std::string mode;
    double primal = 0;
    double dual_objective = 0;   // L_f(gamma) + sum beta
    double dual_surrogate = 0;   // segment-wise L_f(G(w)) + sum beta (weighted runs)
    double kappa = 0;            // min_e (b_e gamma_e + beta_j(e)) / v_e
    double certified_ratio = 0;  // primal / ((1/kappa) * dual)
    double step = 0;
    double epsilon = 0;          // small-bids parameter when applicable
    long micro_steps = 0;
    double max_water_level = 0;
    bool small_bids_validated = true;
    std::vector<TraceRow> trace;  // populated when requested
};

struct SolveOptions {
    bool keep_trace = false;
    // Track the dual objective after every micro-step (needed for the
    // primal/dual drift checks); always tracked per part regardless.
    bool per_step_dual = false;
    SfmOptions sfm;
};

struct SolveOutcome {
    Allocation allocation;
    DualCertificate certificate;
    SolveReport report;
};

// Instantaneous per-unit price of element e at allocation x:
//   b_e * integral over t in [0, v_e/b_e] of g(w^t_e).
double price(const SapInstance& inst, int e, const ThresholdedLevels& tl);

// Fractional water-filling for general values/costs with free disposal.
SolveOutcome solve_fractional(const SapInstance& inst, double step,
                              const SolveOptions& opts = {});

// Specialization for v = b = 1: allocate to the minimum-water-level element.
SolveOutcome solve_matroid_intersection(const SapInstance& inst, double step,
                                        const SolveOptions& opts = {});

// Integral algorithm under the small-bids assumption (requires v = b); water
// levels are taken against f' = (1 - eps) f.
SolveOutcome solve_small_bids(const SapInstance& inst, double eps,
                              const SolveOptions& opts = {});

// A-posteriori competitive-ratio bound from a dual certificate:
// kappa = min_e (b_e gamma_e + beta_{j(e)}) / v_e, bound = primal*kappa/dual.
struct CertifiedBound {
    double kappa = 0;
    double ratio_lower_bound = 0;
};
CertifiedBound certify(const DualCertificate& cert, const SapInstance& inst, double primal,
                       double dual_objective);

}  // namespace polyflow
