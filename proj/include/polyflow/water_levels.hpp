#pragma once

#include <optional>
#include <vector>

#include "polyflow/element_set.hpp"
#include "polyflow/oracles.hpp"
#include "polyflow/sfm.hpp"

namespace polyflow {

// Principal-partition decomposition of a load vector: nested chain sets of
// strictly decreasing density, per-element water levels, and the associated
// utility-allocation duals.
struct WaterLevelDecomposition {
    std::vector<double> levels;       // w_e; 0 outside the universe
    std::vector<ElementSet> chain;    // S_1 ⊂ ... ⊂ S_L (cumulative, S_L = universe)
    std::vector<double> densities;    // t_1 > ... > t_L >= 0
    std::vector<double> alpha;        // alpha_{S_L} = t_L, alpha_{S_l} = t_l - t_{l+1}
    std::vector<double> sua_utility;  // u_e = x_e / w_e for x_e > 0, else 0
    ElementSet universe;

    double max_level() const;
    // Sum of alpha over chain sets containing e (equals w_e).
    double alpha_sum_at(int e) const;
};

struct WaterLevelOptions {
    // Restrict the ground set; elements outside receive level 0 and do not
    // participate (deletion semantics, used by thresholded levels).
    std::optional<ElementSet> universe;
    SfmOptions sfm;
    // Decompose over the oracle's direct-sum blocks before iterating.
    bool use_blocks = true;
};

// Densest-set contraction route (Dinkelbach iteration per chain set).
WaterLevelDecomposition water_levels_alg1(const SubmodularOracle& f,
                                          const std::vector<double>& loads,
                                          const WaterLevelOptions& opts = {});

// Freezing route: scale loads up until a set saturates, pin it, repeat.
WaterLevelDecomposition water_levels_alg2(const SubmodularOracle& f,
                                          const std::vector<double>& loads,
                                          const WaterLevelOptions& opts = {});

// Exhaustive max-min / min-max evaluation of a single element's water level
// (requires universe size <= 16). Both orders must coincide (saddle point).
struct BruteWaterLevel {
    double max_min = 0;
    double min_max = 0;
    ElementSet saddle_s, saddle_t;
};
BruteWaterLevel water_level_brute(const SubmodularOracle& f, const std::vector<double>& loads,
                                  int element,
                                  const std::optional<ElementSet>& universe = std::nullopt);

// Water levels of the load (b_e x_e) restricted to elements with bang-per-buck
// v_e/b_e >= t, evaluated at every distinct ratio plus t = 0. Between two
// consecutive distinct ratios the filtered support (hence the decomposition)
// is constant.
struct ThresholdedLevels {
    std::vector<double> thresholds;               // descending, last entry 0
    std::vector<WaterLevelDecomposition> decs;    // aligned with thresholds
    // Level of element e at filter threshold t.
    double level_at(double t, int e) const;
};
ThresholdedLevels thresholded_levels(const SubmodularOracle& f, const std::vector<double>& x,
                                     const std::vector<double>& costs,
                                     const std::vector<double>& values,
                                     const WaterLevelOptions& opts = {});

// Inclusion-minimal tight set containing `element` under the given load, or
// the positive slack when no tight set contains it.
struct TightSetQuery {
    double slack = 0;                          // min_{S ∋ e} f(S) - load(S)
    std::optional<ElementSet> minimal_tight;   // set when slack is within tolerance
};
TightSetQuery minimal_tight_set(const SubmodularOracle& f, const std::vector<double>& load,
                                int element, const SfmOptions& sfm = {});

// KKT audit of the utility-allocation program encoded by a decomposition.
struct KktReport {
    bool pass = true;
    std::vector<std::string> violations;
};
KktReport verify_sua_kkt(const SubmodularOracle& f, const std::vector<double>& loads,
                         const WaterLevelDecomposition& dec, double tol = 1e-7);

}  // namespace polyflow
