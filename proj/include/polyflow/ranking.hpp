#pragma once

#include <vector>

#include "polyflow/solvers_types.hpp"

namespace polyflow {

// One run of the randomized ranking allocation, with the dual record used by
// the primal-dual accounting: beta_j = a_i (1 - g(r_i)) for the agent that
// receives item j, and alpha_i = a_i g(r_i) charged on span(U_i).
struct RankingRun {
    std::vector<double> seeds;          // r_i
    std::vector<int> assignment;        // item -> agent or -1
    std::vector<ElementSet> assigned;   // U_i per agent
    std::vector<ElementSet> span_sets;  // span_{M_i}(U_i) at termination
    std::vector<double> alpha;          // a_i g(r_i)
    std::vector<double> beta;           // per item
    double welfare = 0;

    double dual_objective(const OswmInstance& inst) const;
};

// Items in arrival order; each goes to the highest-priority agent to whom it
// is available (rank strictly increases), priority a_i (1 - g(r_i)), ties to
// the lowest agent id.
RankingRun ranking_run(const OswmInstance& inst, const std::vector<double>& seeds);

// Offline equivalent: agents peruse all items in decreasing priority order,
// greedily claiming unclaimed items that increase their rank. Produces the
// same assignment as ranking_run.
RankingRun perusal_run(const OswmInstance& inst, const std::vector<double>& seeds);

// span_M(U) = { j : rank(U + j) = rank(U) or j in U }.
ElementSet span_of(const SubmodularOracle& matroid, const ElementSet& u);

struct MonteCarloRatio {
    double mean = 0;
    double stderr_ = 0;
    double opt = 0;
    int trials = 0;
    std::vector<double> ratios;  // per trial, when requested
};
MonteCarloRatio monte_carlo_ratio(const OswmInstance& inst, int trials, uint64_t seed,
                                  bool keep_per_trial = false, int threads = 0);

// Critical seed threshold r* = sup { r : item j* ends up spanned by agent i*
// when r_{i*} = r }, resolved by bisection to `resolution`; sup(empty) = 0.
double critical_threshold(const OswmInstance& inst, std::vector<double> seeds, int agent,
                          int item, double resolution = 1e-6);

}  // namespace polyflow
