#pragma once

#include <optional>
#include <vector>

#include "polyflow/element_set.hpp"
#include "polyflow/oracles.hpp"

namespace polyflow {

// Minimize h(S) = scale * f_T(S) - m(S) over S ⊆ live, where f_T is the
// contraction f(S ∪ T) - f(T), m is a modular weight vector, and `live` is
// disjoint from T. h(empty) = 0, so the minimum is never positive.
struct SfmProblem {
    const SubmodularOracle* f = nullptr;
    ElementSet contracted;  // T; empty set of the right universe if unused
    ElementSet live;        // candidate elements (disjoint from T)
    double scale = 1.0;     // must be >= 0
    const std::vector<double>* weights = nullptr;  // m, indexed by element id; null = 0
    std::optional<int> force_element;              // constrain S to contain this element
};

struct SfmOptions {
    enum class Backend { Auto, Exhaustive, MinNorm };
    Backend backend = Backend::Auto;
    // Auto dispatch: exhaustive per block up to this many live elements.
    int exhaustive_limit = 12;
    // Certified bound on |reported value - true minimum| for the min-norm
    // backend (the exhaustive backend is exact).
    double value_tolerance = 1e-10;
};

struct SfmResult {
    double value = 0;
    ElementSet minimizer;  // one minimizer (subset of live, incl. forced element)
    ElementSet minimal;    // lattice-minimal minimizer
    ElementSet maximal;    // lattice-maximal minimizer
    double gap = 0;        // certified value gap (0 for exhaustive)
    int oracle_like_calls = 0;
};

SfmResult sfm_min(const SfmProblem& problem, const SfmOptions& options = {});

}  // namespace polyflow
