#pragma once

#include <string>
#include <vector>

#include "polyflow/element_set.hpp"
#include "polyflow/oracles.hpp"

namespace polyflow {

// Online submodular assignment instance: offline constraint oracle f, element
// values and costs, and the online arrival order of the parts.
struct SapInstance {
    OraclePtr oracle;
    std::vector<double> values;
    std::vector<double> costs;
    std::vector<ElementSet> parts;  // disjoint, cover the ground set, arrival order

    int n() const { return oracle ? oracle->ground_size() : 0; }
    int part_of(int e) const;
    bool uniform_unit() const;  // all values and costs equal to 1
    // Checks the structural invariants: parts partition, positive values and
    // costs, and f({e}) > 0 for every element.
    void validate() const;
};

// Online submodular welfare instance with matroid-rank utilities: one rank
// oracle over the item ground set per agent, plus agent weights.
struct OswmInstance {
    std::vector<OraclePtr> matroids;  // rank oracle per agent, ground set = items
    std::vector<double> weights;      // a_i >= 0
    int items = 0;

    int agents() const { return static_cast<int>(matroids.size()); }
    void validate() const;
};

}  // namespace polyflow
