#pragma once

#include <string>
#include <vector>

#include "polyflow/instance_io.hpp"

namespace polyflow {

// Classic adversarial family: n unit-capacity offline slots; part j (arriving
// j-th) contains one element per slot in {j, ..., n-1}; v = b = 1.
Json gen_upper_triangular(int n);

// AdWords with a laminar budget tree: budgets are integer multiples of 1 so
// every positive marginal of the cover function is >= 1, and bids lie in
// [eps/2, eps]; v = b.
Json gen_adwords_laminar(int n_elements, int depth, double eps, uint64_t seed);

// Plain AdWords (one budget per bidder): f is a direct sum of budget-scaled
// rank-1 blocks; part j holds one element per bidder in {j, ..., bidders-1}.
Json gen_adwords_triangular(int bidders, double budget);

// Delta copies of a graphic matroid; each arriving edge's part contains its
// Delta color-copies; v = b = 1. Named graphs: "triangle", "path:<k>",
// "cycle:<k>", "complete:<k>".
Json gen_matroid_coloring(const std::string& graph, int delta);
Json gen_matroid_coloring(int n_vertices, const std::vector<std::pair<int, int>>& edges,
                          int delta);

// Random coverage-function oracle with random parts/values/costs, for
// property tests.
Json gen_random_polymatroid(int n, uint64_t seed);

// OSWM instances: random matroid per agent, or the classic triangular
// availability pattern with rank-1 matroids.
Json gen_oswm_random(int agents, int items, uint64_t seed);
Json gen_oswm_triangular(int n);

// Dispatch by family name; unknown families raise InputError.
Json gen_instance(const std::string& family, int n, int depth, int delta, double eps,
                  const std::string& graph, uint64_t seed, double budget = 50.0);

}  // namespace polyflow
