#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polyflow/element_set.hpp"
#include "polyflow/rng.hpp"

namespace polyflow {

// Incremental evaluator for a submodular function along a chain of element
// insertions. push() returns the marginal value and pop() undoes the most
// recent push (strict LIFO discipline). clear() resets to the empty set.
//
// Every algorithm that enumerates subsets or builds greedy vertices goes
// through this interface, so per-family implementations keep the cost of a
// marginal near O(1).
class ChainEvaluator {
public:
    virtual ~ChainEvaluator() = default;
    virtual double push(int e) = 0;
    virtual void pop() = 0;
    virtual void clear() = 0;
    virtual double total() const = 0;
};

// Monotone submodular set function with f(empty) = 0, evaluated over dense
// element ids 0..n-1. Oracles are immutable after construction and safe for
// concurrent reads; internal memo caches are synchronized.
class SubmodularOracle {
public:
    virtual ~SubmodularOracle() = default;

    virtual int ground_size() const = 0;
    virtual double eval(const ElementSet& s) const = 0;
    virtual std::unique_ptr<ChainEvaluator> chain() const = 0;
    virtual std::string kind() const = 0;

    // Partition of the ground set into independent components: f is the
    // direct sum of its restriction to the blocks. Used to decompose
    // minimization and water-level computations. Default: one block.
    virtual std::vector<ElementSet> blocks() const;

    virtual double marginal(const ElementSet& base, int e) const;
};

using OraclePtr = std::shared_ptr<const SubmodularOracle>;

// --- Matroid / polymatroid families ---------------------------------------

// f(S) = scale * min(|S|, capacity)
OraclePtr make_uniform_rank(int n, int capacity, double scale = 1.0);

// f(S) = sum_i min(|S ∩ part_i|, capacity_i); parts must partition 0..n-1.
OraclePtr make_partition_rank(int n, std::vector<std::vector<int>> parts,
                              std::vector<int> capacities);

// Rank of the graphic matroid: elements are edge ids into `edges`.
OraclePtr make_graphic_rank(int n_vertices, std::vector<std::pair<int, int>> edges);

// Rank of the transversal matroid: element e may be matched to any right
// vertex in adjacency[e].
OraclePtr make_transversal_rank(int n_right, std::vector<std::vector<int>> adjacency);

// Minimum-budget laminar cover cost (the laminar AdWords function).
struct LaminarBudgetSpec {
    struct Entry {
        std::vector<int> members;
        double budget = 0;
    };
    int n = 0;
    std::vector<Entry> sets;
};
OraclePtr make_laminar_budget(const LaminarBudgetSpec& spec);

// Weighted coverage function: f(S) = total weight of points covered by S.
OraclePtr make_coverage(std::vector<double> point_weights,
                        std::vector<std::vector<int>> covers);

// Explicit table over all 2^n subsets (n <= 24), indexed by bitmask.
OraclePtr make_table(int n, std::vector<double> values);

// --- Wrappers ---------------------------------------------------------------

OraclePtr make_scaled(OraclePtr base, double factor);
OraclePtr make_direct_sum(std::vector<OraclePtr> children);
// Contraction f_T(S) = f(S ∪ T) - f(T); ground ids unchanged, elements of T
// contribute zero marginal.
OraclePtr make_contraction(OraclePtr base, ElementSet contracted);
// Restriction f(S ∩ keep); elements outside `keep` contribute zero marginal.
OraclePtr make_restriction(OraclePtr base, ElementSet keep);

// --- Checks -----------------------------------------------------------------

struct SubmodularityReport {
    bool pass = true;
    std::string detail;
    // On failure, a violating pair per f(A)+f(B) >= f(A∪B)+f(A∩B) or a
    // monotonicity/normalization witness.
    std::optional<ElementSet> witness_a, witness_b;
};

// Exhaustive mode requires n <= 20 and checks normalization, monotonicity and
// submodularity over every subset; sampled mode draws `samples` random pairs.
SubmodularityReport verify_submodular(const SubmodularOracle& f, bool exhaustive,
                                      int samples = 0, uint64_t seed = 1);

// Minimum-budget cover cost of S under a laminar family (same value as the
// oracle's eval, exposed for direct use and cross-tests).
double laminar_budget_eval(const LaminarBudgetSpec& spec, const ElementSet& s);

// Lovász extension: sum over the sorted distinct positive levels tau of w of
// (tau_k - tau_{k+1}) * f({e : w_e >= tau_k}).
double eval_lovasz(const SubmodularOracle& f, const std::vector<double>& w);

}  // namespace polyflow
