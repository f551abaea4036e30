#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polyflow/element_set.hpp"
#include "polyflow/oracles.hpp"
#include "polyflow/solvers_types.hpp"

namespace polyflow {

// Exact fractional optimum of the assignment program
//   max v.x  s.t.  x(Q_j) <= 1,  sum_{e in S} b_e x_e <= f(S),  x >= 0.
struct LpSolution {
    std::vector<double> x;
    double objective = 0;
    // Active subset constraints (with duals) and part duals at the optimum.
    std::vector<ElementSet> active_sets;
    std::vector<double> set_duals;
    std::vector<double> part_duals;
    std::string backend;      // "exhaustive" or "cutting-plane"
    double final_slack = 0;   // most negative separation slack at termination
};

struct LpOptions {
    enum class Backend { Auto, Exhaustive, CuttingPlane };
    Backend backend = Backend::Auto;
    double separation_tol = 1e-8;
};

LpSolution lp_opt_fractional(const SapInstance& inst, const LpOptions& opts = {});

// Exhaustive welfare maximization for OSWM (items to agents or unassigned).
struct OswmOptimum {
    std::vector<int> assignment;  // item -> agent id, or -1
    double welfare = 0;
};
OswmOptimum oswm_opt(const OswmInstance& inst);

// Exhaustive polymatroid membership check for a load vector (n <= 20):
// feasible iff load(S) <= f(S) for every S; returns the most violated set.
struct FeasibilityWitness {
    bool feasible = true;
    double min_slack = 0;
    ElementSet witness;
};
FeasibilityWitness brute_force_feasibility(const SubmodularOracle& f,
                                           const std::vector<double>& load);

// Dense tableau simplex for max c.x s.t. Ax <= b, x >= 0 with b >= 0
// (slack basis is feasible). Bland's rule; returns duals of the rows.
struct SimplexResult {
    bool optimal = false;
    std::vector<double> x;
    std::vector<double> row_duals;
    double objective = 0;
};
SimplexResult simplex_solve(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& rhs, const std::vector<double>& objective);

}  // namespace polyflow
