#include "polyflow/water_levels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyflow/errors.hpp"
#include "polyflow/rng.hpp"

namespace polyflow {

double WaterLevelDecomposition::max_level() const {
    double m = 0;
    for (double v : levels) m = std::max(m, v);
    return m;
}

double WaterLevelDecomposition::alpha_sum_at(int e) const {
    double s = 0;
    for (size_t l = 0; l < chain.size(); ++l)
        if (chain[l].contains(e)) s += alpha[l];
    return s;
}

namespace {

struct Round {
    double density;
    ElementSet increment;
};

void validate_loads(const SubmodularOracle& f, const std::vector<double>& loads) {
    if (static_cast<int>(loads.size()) != f.ground_size())
        throw InputError("water levels: load vector size mismatch");
    for (double v : loads)
        if (v < 0 || !std::isfinite(v))
            throw InputError("water levels: loads must be finite and nonnegative");
}

double load_sum(const std::vector<double>& loads, const ElementSet& s) {
    double acc = 0;
    s.for_each([&](int e) { acc += loads[e]; });
    return acc;
}

// Dinkelbach iteration for the maximal densest set of `loads` over f
// contracted by `contracted`, restricted to `live`.
Round densest_round(const SubmodularOracle& f, const std::vector<double>& loads,
                    const ElementSet& contracted, const ElementSet& live,
                    const SfmOptions& sfm_opts) {
    const double x_live = load_sum(loads, live);
    const double f_t = f.eval(contracted);
    const double f_live = f.eval(live | contracted) - f_t;
    if (f_live <= 0) {
        if (x_live > 1e-12)
            throw InputError("water levels: positive load on elements spanned by the chain");
        return {0.0, live};
    }
    const double exit_tol = 1e-12 * std::max(1.0, x_live);

    double t = x_live / f_live;
    SfmProblem prob;
    prob.f = &f;
    prob.contracted = contracted;
    prob.live = live;
    prob.weights = &loads;
    for (int iter = 0; iter < 300; ++iter) {
        prob.scale = t;
        SfmResult res = sfm_min(prob, sfm_opts);
        if (res.value >= -exit_tol) {
            if (res.maximal.empty())
                throw InvariantError("water levels: empty densest set");
            return {t, res.maximal};
        }
        double fs = f.eval(res.maximal | contracted) - f_t;
        if (fs <= 0)
            throw InputError("water levels: positive load on a zero-marginal set");
        double t_next = load_sum(loads, res.maximal) / fs;
        if (t_next <= t * (1 + 1e-15)) {
            // Numerical stall: accept the current maximal set at its density.
            return {t_next, res.maximal};
        }
        t = t_next;
    }
    throw InvariantError("water levels: Dinkelbach iteration did not converge");
}

std::vector<Round> alg1_rounds(const SubmodularOracle& f, const std::vector<double>& loads,
                               const ElementSet& universe, const WaterLevelOptions& opts) {
    std::vector<Round> rounds;
    ElementSet contracted(f.ground_size());
    ElementSet live = universe;
    while (!live.empty()) {
        Round r = densest_round(f, loads, contracted, live, opts.sfm);
        rounds.push_back({r.density, r.increment});
        contracted |= r.increment;
        live -= r.increment;
    }
    return rounds;
}

WaterLevelDecomposition assemble(const SubmodularOracle& f, const std::vector<double>& loads,
                                 const ElementSet& universe, std::vector<Round> rounds) {
    // Merge rounds whose densities coincide (ties across direct-sum blocks).
    std::stable_sort(rounds.begin(), rounds.end(),
                     [](const Round& a, const Round& b) { return a.density > b.density; });
    std::vector<Round> merged;
    for (auto& r : rounds) {
        if (r.increment.empty()) continue;
        if (!merged.empty()) {
            double ref = std::max({1.0, merged.back().density});
            if (merged.back().density - r.density <= 1e-12 * ref) {
                merged.back().increment |= r.increment;
                merged.back().density = std::min(merged.back().density, r.density);
                continue;
            }
        }
        merged.push_back(std::move(r));
    }

    WaterLevelDecomposition dec;
    dec.universe = universe;
    dec.levels.assign(f.ground_size(), 0.0);
    dec.sua_utility.assign(f.ground_size(), 0.0);
    ElementSet acc(f.ground_size());
    for (const Round& r : merged) {
        acc |= r.increment;
        dec.chain.push_back(acc);
        dec.densities.push_back(r.density);
        r.increment.for_each([&](int e) {
            dec.levels[e] = r.density;
            if (loads[e] > 0 && r.density > 0) dec.sua_utility[e] = loads[e] / r.density;
        });
    }
    dec.alpha.assign(dec.densities.size(), 0.0);
    if (!dec.densities.empty()) {
        size_t last = dec.densities.size() - 1;
        dec.alpha[last] = dec.densities[last];
        for (size_t l = 0; l + 1 <= last && last > 0; ++l)
            dec.alpha[l] = dec.densities[l] - dec.densities[l + 1];
    }
    return dec;
}

ElementSet resolve_universe(const SubmodularOracle& f, const WaterLevelOptions& opts) {
    if (opts.universe) {
        if (opts.universe->universe_size() != f.ground_size())
            throw InputError("water levels: universe mask size mismatch");
        return *opts.universe;
    }
    return ElementSet::full(f.ground_size());
}

}  // namespace

WaterLevelDecomposition water_levels_alg1(const SubmodularOracle& f,
                                          const std::vector<double>& loads,
                                          const WaterLevelOptions& opts) {
    validate_loads(f, loads);
    ElementSet universe = resolve_universe(f, opts);

    std::vector<Round> rounds;
    if (opts.use_blocks) {
        for (const ElementSet& b : f.blocks()) {
            ElementSet group = b & universe;
            if (group.empty()) continue;
            for (Round& r : alg1_rounds(f, loads, group, opts)) rounds.push_back(std::move(r));
        }
    } else {
        rounds = alg1_rounds(f, loads, universe, opts);
    }
    return assemble(f, loads, universe, std::move(rounds));
}

WaterLevelDecomposition water_levels_alg2(const SubmodularOracle& f,
                                          const std::vector<double>& loads,
                                          const WaterLevelOptions& opts) {
    validate_loads(f, loads);
    const int n = f.ground_size();
    ElementSet universe = resolve_universe(f, opts);

    ElementSet frozen(n);
    std::vector<double> pinned(n, 0.0);  // frozen load contribution tau_freeze * x
    std::vector<Round> rounds;

    auto has_unfrozen_mass = [&] {
        bool found = false;
        (universe - frozen).for_each([&](int e) {
            if (loads[e] > 0) found = true;
        });
        return found;
    };

    std::vector<double> m(n, 0.0);
    while (has_unfrozen_mass()) {
        ElementSet unfrozen = universe - frozen;
        // Scale tau at which the next set saturates: tau* is the minimum over
        // sets S of (f(S) - pinned(S ∩ F)) / x(S \ F); approach it from above.
        double num = f.eval(universe) - load_sum(pinned, frozen);
        double den = load_sum(loads, unfrozen);
        if (den <= 0) break;
        double tau = num / den;

        ElementSet freeze_set(n);
        const double exit_tol = 1e-12 * std::max(1.0, f.eval(universe));
        bool done = false;
        for (int iter = 0; iter < 300 && !done; ++iter) {
            frozen.for_each([&](int e) { m[e] = pinned[e]; });
            unfrozen.for_each([&](int e) { m[e] = tau * loads[e]; });
            SfmProblem prob;
            prob.f = &f;
            prob.live = universe;
            prob.scale = 1.0;
            prob.weights = &m;
            SfmResult res = sfm_min(prob, opts.sfm);
            if (res.value >= -exit_tol) {
                freeze_set = res.maximal;
                done = true;
                break;
            }
            const ElementSet& s = res.minimizer;
            double s_num = f.eval(s) - load_sum(pinned, s & frozen);
            double s_den = load_sum(loads, s - frozen);
            if (s_den <= 0)
                throw InvariantError("freezing: saturated set without unfrozen mass");
            double tau_next = s_num / s_den;
            if (tau_next >= tau * (1 - 1e-15)) {
                freeze_set = res.maximal;
                done = true;
                break;
            }
            tau = tau_next;
        }
        if (!done) throw InvariantError("freezing: scale search did not converge");

        ElementSet fresh = freeze_set - frozen;
        if (fresh.empty())
            throw InvariantError("freezing: no new element saturated");
        if (tau <= 0)
            throw InputError("water levels: positive load on a zero-valued set");
        double level = 1.0 / tau;
        fresh.for_each([&](int e) { pinned[e] = tau * loads[e]; });
        frozen |= freeze_set;
        rounds.push_back({level, fresh});
    }

    // Elements that never saturate at a finite scale sit at level 0.
    ElementSet leftover = universe - frozen;
    if (!leftover.empty()) rounds.push_back({0.0, leftover});
    return assemble(f, loads, universe, std::move(rounds));
}

BruteWaterLevel water_level_brute(const SubmodularOracle& f, const std::vector<double>& loads,
                                  int element, const std::optional<ElementSet>& universe_in) {
    validate_loads(f, loads);
    const int n = f.ground_size();
    ElementSet universe = universe_in ? *universe_in : ElementSet::full(n);
    std::vector<int> elems = universe.to_vector();
    const int k = static_cast<int>(elems.size());
    if (k > 16)
        throw CapabilityError("water_level_brute: exhaustive route requires universe <= 16");
    int e_local = -1;
    for (int i = 0; i < k; ++i)
        if (elems[i] == element) e_local = i;
    if (e_local < 0) throw InputError("water_level_brute: element outside universe");

    // f over all subsets of the universe.
    const uint32_t full = k ? (k == 32 ? ~0u : ((1u << k) - 1)) : 0;
    std::vector<double> fv(size_t{1} << k, 0.0), xv(size_t{1} << k, 0.0);
    {
        auto ch = f.chain();
        // Iterative DFS over inclusion of elems[pos].
        struct Frame {
            int pos;
            uint32_t mask;
            double fval, xval;
            int stage;
        };
        std::vector<Frame> stack{{0, 0, 0.0, 0.0, 0}};
        while (!stack.empty()) {
            Frame& fr = stack.back();
            if (fr.pos == k) {
                fv[fr.mask] = fr.fval;
                xv[fr.mask] = fr.xval;
                stack.pop_back();
                continue;
            }
            if (fr.stage == 0) {
                fr.stage = 1;
                stack.push_back({fr.pos + 1, fr.mask, fr.fval, fr.xval, 0});
            } else if (fr.stage == 1) {
                double m = ch->push(elems[fr.pos]);
                fr.stage = 2;
                stack.push_back({fr.pos + 1, fr.mask | (1u << fr.pos), fr.fval + m,
                                 fr.xval + loads[elems[fr.pos]], 0});
            } else {
                ch->pop();
                stack.pop_back();
            }
        }
    }

    if (fv[1u << e_local] <= 0)
        throw InputError("water_level_brute: element has zero singleton value");

    auto to_global = [&](uint32_t mask) {
        ElementSet s(n);
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) s.add(elems[i]);
        return s;
    };

    BruteWaterLevel out;
    const uint32_t ebit = 1u << e_local;

    // max over S ∋ e of min over T ⊆ S \ {e} with f_T({e}) > 0.
    double best_max = -1;
    uint32_t best_s = ebit;
    for (uint32_t s = 0; s <= full; ++s) {
        if (!(s & ebit)) continue;
        double worst = std::numeric_limits<double>::infinity();
        uint32_t rest = s & ~ebit;
        uint32_t t = rest;
        while (true) {
            double marg_e = fv[t | ebit] - fv[t];
            if (marg_e > 0) {
                double denom = fv[s] - fv[t];
                double ratio = denom > 0 ? (xv[s] - xv[t]) / denom : 0.0;
                worst = std::min(worst, ratio);
            }
            if (t == 0) break;
            t = (t - 1) & rest;
        }
        if (std::isfinite(worst) && worst > best_max) {
            best_max = worst;
            best_s = s;
        }
        if (s == full) break;
    }
    out.max_min = best_max;
    out.saddle_s = to_global(best_s);

    // min over T with f_T({e}) > 0 of max over S ⊇ T with e ∈ S.
    double best_min = std::numeric_limits<double>::infinity();
    uint32_t best_t = 0;
    const uint32_t others = full & ~ebit;
    uint32_t t = others;
    while (true) {
        double marg_e = fv[t | ebit] - fv[t];
        if (marg_e > 0) {
            double best_inner = -1;
            uint32_t free = others & ~t;
            uint32_t r = free;
            while (true) {
                uint32_t s = t | ebit | r;
                double denom = fv[s] - fv[t];
                double ratio = denom > 0 ? (xv[s] - xv[t]) / denom : 0.0;
                best_inner = std::max(best_inner, ratio);
                if (r == 0) break;
                r = (r - 1) & free;
            }
            if (best_inner < best_min) {
                best_min = best_inner;
                best_t = t;
            }
        }
        if (t == 0) break;
        t = (t - 1) & others;
    }
    out.min_max = best_min;
    out.saddle_t = to_global(best_t);
    return out;
}

ThresholdedLevels thresholded_levels(const SubmodularOracle& f, const std::vector<double>& x,
                                     const std::vector<double>& costs,
                                     const std::vector<double>& values,
                                     const WaterLevelOptions& opts) {
    const int n = f.ground_size();
    if (static_cast<int>(x.size()) != n || static_cast<int>(costs.size()) != n ||
        static_cast<int>(values.size()) != n)
        throw InputError("thresholded_levels: vector size mismatch");
    std::vector<double> ratios(n);
    for (int e = 0; e < n; ++e) {
        if (costs[e] <= 0) throw InputError("thresholded_levels: costs must be positive");
        if (values[e] <= 0) throw InputError("thresholded_levels: values must be positive");
        ratios[e] = values[e] / costs[e];
    }
    std::vector<double> loads(n);
    for (int e = 0; e < n; ++e) loads[e] = costs[e] * x[e];

    std::vector<double> distinct = ratios;
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    ElementSet base_universe = resolve_universe(f, opts);
    ThresholdedLevels out;
    for (double r : distinct) {
        ElementSet support(n);
        base_universe.for_each([&](int e) {
            if (ratios[e] >= r) support.add(e);
        });
        WaterLevelOptions sub = opts;
        sub.universe = support;
        out.thresholds.push_back(r);
        out.decs.push_back(water_levels_alg1(f, loads, sub));
    }
    // t = 0: the plain water levels of the full load vector.
    WaterLevelOptions sub = opts;
    sub.universe = base_universe;
    out.thresholds.push_back(0.0);
    out.decs.push_back(water_levels_alg1(f, loads, sub));
    return out;
}

double ThresholdedLevels::level_at(double t, int e) const {
    if (thresholds.empty()) return 0.0;
    if (t > thresholds.front()) return 0.0;  // filter is empty above the top ratio
    for (size_t i = 0; i + 1 < thresholds.size(); ++i)
        if (t > thresholds[i + 1]) return decs[i].levels[e];
    return decs.back().levels[e];
}

TightSetQuery minimal_tight_set(const SubmodularOracle& f, const std::vector<double>& load,
                                int element, const SfmOptions& sfm) {
    validate_loads(f, load);
    const int n = f.ground_size();
    if (element < 0 || element >= n) throw InputError("minimal_tight_set: bad element");

    // Under a feasible load, tight sets decompose over direct-sum blocks, so
    // the minimal tight set containing e lives inside e's block.
    ElementSet live(n);
    for (const ElementSet& b : f.blocks())
        if (b.contains(element)) live = b;

    SfmProblem prob;
    prob.f = &f;
    prob.live = live;
    prob.scale = 1.0;
    prob.weights = &load;
    prob.force_element = element;
    SfmResult res = sfm_min(prob, sfm);

    TightSetQuery q;
    q.slack = res.value;
    double f_min = f.eval(res.minimal);
    if (res.value <= tightness_slack(f_min)) q.minimal_tight = res.minimal;
    return q;
}

KktReport verify_sua_kkt(const SubmodularOracle& f, const std::vector<double>& loads,
                         const WaterLevelDecomposition& dec, double tol) {
    KktReport report;
    auto violate = [&](std::string msg) {
        report.pass = false;
        report.violations.push_back(std::move(msg));
    };
    const int n = f.ground_size();
    const std::vector<double>& u = dec.sua_utility;

    // Primal feasibility: u(S) <= f(S); exhaustive when small, otherwise the
    // chain sets plus random samples.
    int k = dec.universe.count();
    if (k <= 14) {
        SfmProblem prob;
        prob.f = &f;
        prob.live = dec.universe;
        prob.weights = &u;
        SfmOptions opts;
        opts.backend = SfmOptions::Backend::Exhaustive;
        SfmResult res = sfm_min(prob, opts);
        if (res.value < -tol) violate("primal infeasible: u(S) > f(S) on some S");
    } else {
        SplitMix64 rng(0xC0FFEE);
        auto check_set = [&](const ElementSet& s) {
            double us = load_sum(u, s);
            double fs = f.eval(s);
            if (us > fs + tol * std::max(1.0, fs)) violate("primal infeasible on sampled set");
        };
        for (const ElementSet& s : dec.chain) check_set(s);
        for (int it = 0; it < 200; ++it) {
            ElementSet s(n);
            dec.universe.for_each([&](int e) {
                if (rng.next_u64() & 1) s.add(e);
            });
            check_set(s);
        }
    }

    for (double a : dec.alpha)
        if (a < -tol) violate("negative dual alpha");

    // Stationarity: x_e / u_e = sum of alpha over chain sets containing e.
    dec.universe.for_each([&](int e) {
        if (loads[e] <= 0) return;
        if (u[e] <= 0) {
            violate("zero utility on a loaded element");
            return;
        }
        double lhs = loads[e] / u[e];
        double rhs = dec.alpha_sum_at(e);
        if (std::abs(lhs - rhs) > tol * std::max(1.0, std::abs(lhs)))
            violate("stationarity violated at element " + std::to_string(e));
    });

    // Complementary slackness: chain sets carrying positive alpha are tight.
    for (size_t l = 0; l < dec.chain.size(); ++l) {
        if (dec.alpha[l] <= tol) continue;
        double us = load_sum(u, dec.chain[l]);
        double fs = f.eval(dec.chain[l]);
        if (std::abs(us - fs) > tol * std::max(1.0, fs))
            violate("chain set " + std::to_string(l) + " not tight");
    }
    return report;
}

}  // namespace polyflow
