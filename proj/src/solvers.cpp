#include "polyflow/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "polyflow/errors.hpp"
#include "polyflow/offline.hpp"

namespace polyflow {

namespace {

constexpr double kUtilityFloor = 1e-9;
constexpr double kBudgetEps = 1e-12;

// Segment representation of the thresholded-level family: on (lo_k, hi_k] the
// filtered decomposition is decs[k].
struct Segments {
    std::vector<double> hi, lo;
    const ThresholdedLevels* tl;
};

Segments segments_of(const ThresholdedLevels& tl) {
    Segments s;
    s.tl = &tl;
    // thresholds: r_1 > ... > r_K > 0 == thresholds.back(); decs aligned.
    // Segment k (for k < K): (r_{k+1}, r_k] with dec_k; segment K-1 covers
    // (0, r_K] via the final ratio's dec (== the t=0 dec).
    size_t K = tl.thresholds.size() - 1;  // number of distinct ratios
    for (size_t k = 0; k < K; ++k) {
        s.hi.push_back(tl.thresholds[k]);
        s.lo.push_back(k + 1 < K ? tl.thresholds[k + 1] : 0.0);
    }
    return s;
}

double gamma_of(const Segments& seg, int e) {
    double acc = 0;
    for (size_t k = 0; k < seg.hi.size(); ++k)
        acc += (seg.hi[k] - seg.lo[k]) * price_G(seg.tl->decs[k].levels[e]);
    return acc;
}

double price_from_segments(const Segments& seg, double cost, double ratio, int e) {
    double acc = 0;
    for (size_t k = 0; k < seg.hi.size(); ++k) {
        double hi = std::min(seg.hi[k], ratio);
        double lo = seg.lo[k];
        if (hi > lo) acc += (hi - lo) * price_g(seg.tl->decs[k].levels[e]);
    }
    return cost * acc;
}

double surrogate_gamma_term(const SubmodularOracle& f, const Segments& seg) {
    double acc = 0;
    std::vector<double> gw(f.ground_size());
    for (size_t k = 0; k < seg.hi.size(); ++k) {
        const auto& dec = seg.tl->decs[k];
        for (int e = 0; e < f.ground_size(); ++e)
            gw[e] = dec.universe.contains(e) ? price_G(dec.levels[e]) : 0.0;
        acc += (seg.hi[k] - seg.lo[k]) * eval_lovasz(f, gw);
    }
    return acc;
}

void refresh_gamma(std::vector<double>& gamma, const Segments& seg) {
    for (size_t e = 0; e < gamma.size(); ++e) {
        double fresh = gamma_of(seg, static_cast<int>(e));
        if (fresh < gamma[e] - 1e-9)
            throw InvariantError("dual gamma decreased between micro-steps");
        gamma[e] = std::max(gamma[e], fresh);
    }
}

// Largest feasible increase of the load on e: min slack f(S) - load(S) over
// sets S containing e, optionally excluding another element.
double directional_slack(const SubmodularOracle& f, const std::vector<double>& load, int e,
                         int excluded, const SfmOptions& sfm) {
    const int n = f.ground_size();
    ElementSet live(n);
    for (const ElementSet& b : f.blocks())
        if (b.contains(e)) live = b;
    if (excluded >= 0) live.remove(excluded);
    SfmProblem prob;
    prob.f = &f;
    prob.live = live;
    prob.weights = &load;
    prob.force_element = e;
    return sfm_min(prob, sfm).value;
}

double min_kappa(const SapInstance& inst, const std::vector<double>& gamma,
                 const std::vector<double>& beta, int revealed) {
    double k = std::numeric_limits<double>::infinity();
    for (int j = 0; j < revealed; ++j)
        inst.parts[j].for_each([&](int e) {
            k = std::min(k, (inst.costs[e] * gamma[e] + beta[j]) / inst.values[e]);
        });
    return std::isfinite(k) ? k : 0.0;
}

void check_online_feasibility(const WaterLevelDecomposition& dec) {
    if (dec.max_level() > 1.0 + 1e-6)
        throw InvariantError("online allocation left the polymatroid (water level " +
                             std::to_string(dec.max_level()) + ")");
}

}  // namespace

double price(const SapInstance& inst, int e, const ThresholdedLevels& tl) {
    Segments seg = segments_of(tl);
    return price_from_segments(seg, inst.costs[e], inst.values[e] / inst.costs[e], e);
}

CertifiedBound certify(const DualCertificate& cert, const SapInstance& inst, double primal,
                       double dual_objective) {
    CertifiedBound out;
    double kappa = std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(inst.parts.size()); ++j)
        inst.parts[j].for_each([&](int e) {
            double lhs = inst.costs[e] * cert.gamma[e] + cert.beta[j];
            kappa = std::min(kappa, lhs / inst.values[e]);
        });
    if (!std::isfinite(kappa) || kappa <= 0 || dual_objective <= 0) return out;
    out.kappa = kappa;
    out.ratio_lower_bound = primal * kappa / dual_objective;
    if (out.ratio_lower_bound > 1.0 + 1e-6)
        throw InvariantError("certified ratio exceeded 1");
    return out;
}

// ---------------------------------------------------------------------------

SolveOutcome solve_fractional(const SapInstance& inst, double step, const SolveOptions& opts) {
    inst.validate();
    if (step <= 0) throw InputError("solve_fractional: step must be positive");
    const int n = inst.n();
    const SubmodularOracle& f = *inst.oracle;
    const int m = static_cast<int>(inst.parts.size());

    std::vector<double> x(n, 0.0), load(n, 0.0);
    std::vector<double> gamma(n, 0.0), beta(m, 0.0);
    double primal = 0;
    long micro = 0;
    double dual_surrogate = 0;

    WaterLevelOptions wl;
    wl.sfm = opts.sfm;

    SolveOutcome out;
    out.report.mode = "frac";
    out.report.step = step;

    auto ratio = [&](int e) { return inst.values[e] / inst.costs[e]; };

    for (int j = 0; j < m; ++j) {
        double budget = 0;
        inst.parts[j].for_each([&](int e) { budget += x[e]; });
        ElementSet saturated(n);
        const long iter_guard = 4 * static_cast<long>(1.0 / step + 1) + 64L * n + 64;
        for (long it = 0; it < iter_guard; ++it) {
            ThresholdedLevels tl = thresholded_levels(f, x, inst.costs, inst.values, wl);
            Segments seg = segments_of(tl);
            refresh_gamma(gamma, seg);
            check_online_feasibility(tl.decs.back());
            if (opts.per_step_dual || opts.keep_trace)
                dual_surrogate = surrogate_gamma_term(f, seg);

            if (budget >= 1.0 - kBudgetEps) break;

            // Highest marginal utility, ties to the lowest element id (the
            // scan order is ascending, so a strict > keeps the first).
            int pick = -1;
            double best_util = kUtilityFloor;
            for (int e : inst.parts[j].to_vector()) {
                if (saturated.contains(e)) continue;
                double util = inst.values[e] -
                              price_from_segments(seg, inst.costs[e], ratio(e), e);
                if (util > best_util) {
                    best_util = util;
                    pick = e;
                }
            }
            if (pick < 0) break;

            TightSetQuery q = minimal_tight_set(f, load, pick, opts.sfm);
            double delta = 0;
            int alt = -1;
            if (!q.minimal_tight) {
                delta = std::min({step, 1.0 - budget, q.slack / inst.costs[pick]});
                if (delta <= 1e-15) {
                    saturated.add(pick);
                    continue;
                }
                x[pick] += delta;
                load[pick] += inst.costs[pick] * delta;
                primal += inst.values[pick] * delta;
                budget += delta;
            } else {
                // Free disposal: shed mass from the lowest bang-per-buck
                // element of the minimal tight set that still carries mass.
                const ElementSet& tight = *q.minimal_tight;
                tight.for_each([&](int e2) {
                    if (e2 != pick && x[e2] <= 1e-12) return;
                    if (alt < 0 || ratio(e2) < ratio(alt) - 1e-15) alt = e2;
                });
                if (alt < 0 || alt == pick || ratio(alt) >= ratio(pick) - 1e-12) {
                    saturated.add(pick);
                    continue;
                }
                double slack2 = directional_slack(f, load, pick, alt, opts.sfm);
                delta = std::min({step, 1.0 - budget,
                                  x[alt] * inst.costs[alt] / inst.costs[pick],
                                  slack2 / inst.costs[pick]});
                if (delta <= 1e-15) {
                    saturated.add(pick);
                    continue;
                }
                double shed = delta * inst.costs[pick] / inst.costs[alt];
                x[pick] += delta;
                x[alt] = std::max(0.0, x[alt] - shed);
                load[pick] += inst.costs[pick] * delta;
                load[alt] = inst.costs[alt] * x[alt];
                primal += inst.values[pick] * delta - inst.values[alt] * shed;
                budget += delta;
                if (inst.parts[j].contains(alt)) budget -= shed;
            }
            beta[j] += best_util * delta;
            ++micro;
            if (opts.keep_trace) {
                double dual_now = dual_surrogate;
                double beta_sum = 0;
                for (double b : beta) beta_sum += b;
                out.report.trace.push_back({micro, j, pick, delta, primal,
                                            dual_now + beta_sum,
                                            min_kappa(inst, gamma, beta, j + 1)});
            }
        }
    }

    ThresholdedLevels tl = thresholded_levels(f, x, inst.costs, inst.values, wl);
    Segments seg = segments_of(tl);
    refresh_gamma(gamma, seg);
    check_online_feasibility(tl.decs.back());

    out.allocation.x = x;
    out.allocation.revealed_parts = m;
    out.certificate.gamma = gamma;
    out.certificate.beta = beta;
    double beta_sum = 0;
    for (double b : beta) beta_sum += b;
    out.report.primal = primal;
    out.report.dual_objective = eval_lovasz(f, gamma) + beta_sum;
    out.report.dual_surrogate = surrogate_gamma_term(f, seg) + beta_sum;
    out.report.micro_steps = micro;
    out.report.max_water_level = tl.decs.back().max_level();
    CertifiedBound cb = certify(out.certificate, inst, primal, out.report.dual_surrogate);
    out.report.kappa = cb.kappa;
    out.report.certified_ratio = cb.ratio_lower_bound;
    return out;
}

// ---------------------------------------------------------------------------

SolveOutcome solve_matroid_intersection(const SapInstance& inst, double step,
                                        const SolveOptions& opts) {
    inst.validate();
    if (!inst.uniform_unit())
        throw InputError("solve_matroid_intersection requires v_e = b_e = 1");
    if (step <= 0) throw InputError("solve_matroid_intersection: step must be positive");
    const int n = inst.n();
    const SubmodularOracle& f = *inst.oracle;
    const int m = static_cast<int>(inst.parts.size());

    std::vector<double> x(n, 0.0);
    std::vector<double> gamma(n, 0.0), beta(m, 0.0);
    double primal = 0;
    long micro = 0;

    WaterLevelOptions wl;
    wl.sfm = opts.sfm;

    SolveOutcome out;
    out.report.mode = "mi";
    out.report.step = step;

    auto refresh = [&](const WaterLevelDecomposition& dec) {
        for (int e = 0; e < n; ++e) {
            double fresh = price_G(dec.levels[e]);
            if (fresh < gamma[e] - 1e-9)
                throw InvariantError("dual gamma decreased between micro-steps");
            gamma[e] = std::max(gamma[e], fresh);
        }
        check_online_feasibility(dec);
    };

    WaterLevelDecomposition dec = water_levels_alg1(f, x, wl);
    for (int j = 0; j < m; ++j) {
        double budget = 0;
        const long iter_guard = 2 * static_cast<long>(1.0 / step + 1) + 64L * n + 64;
        for (long it = 0; it < iter_guard && budget < 1.0 - kBudgetEps; ++it) {
            int pick = -1;
            double best = 1.0 - 1e-12;
            inst.parts[j].for_each([&](int e) {
                if (dec.levels[e] < best) {
                    best = dec.levels[e];
                    pick = e;
                }
            });
            if (pick < 0) break;

            double slack = directional_slack(f, x, pick, -1, opts.sfm);
            double delta = std::min({step, 1.0 - budget, slack});
            if (delta <= 1e-15) break;
            double w_before = dec.levels[pick];
            x[pick] += delta;
            primal += delta;
            budget += delta;
            beta[j] += (1.0 - price_g(w_before)) * delta;
            ++micro;

            dec = water_levels_alg1(f, x, wl);
            refresh(dec);
            if (opts.keep_trace) {
                double beta_sum = 0;
                for (double b : beta) beta_sum += b;
                std::vector<double> gw(n);
                for (int e = 0; e < n; ++e) gw[e] = price_G(dec.levels[e]);
                out.report.trace.push_back({micro, j, pick, delta, primal,
                                            eval_lovasz(f, gw) + beta_sum,
                                            min_kappa(inst, gamma, beta, j + 1)});
            }
        }
    }

    out.allocation.x = x;
    out.allocation.revealed_parts = m;
    out.certificate.gamma = gamma;
    out.certificate.beta = beta;
    double beta_sum = 0;
    for (double b : beta) beta_sum += b;
    out.report.primal = primal;
    out.report.dual_objective = eval_lovasz(f, gamma) + beta_sum;
    out.report.dual_surrogate = out.report.dual_objective;
    out.report.micro_steps = micro;
    out.report.max_water_level = dec.max_level();
    CertifiedBound cb = certify(out.certificate, inst, primal, out.report.dual_objective);
    out.report.kappa = cb.kappa;
    out.report.certified_ratio = cb.ratio_lower_bound;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Exhaustive check of the small-bids assumption: max over elements of
// b_e / min{ f_T({e}) : f_T({e}) > 0 }.
double measured_small_bids_eps(const SapInstance& inst) {
    const int n = inst.n();
    const SubmodularOracle& f = *inst.oracle;
    double worst = 0;
    for (int e = 0; e < n; ++e) {
        std::vector<int> others;
        for (int o = 0; o < n; ++o)
            if (o != e) others.push_back(o);
        auto ch = f.chain();
        double min_pos = std::numeric_limits<double>::infinity();
        // DFS over subsets T of the other elements.
        struct Walk {
            ChainEvaluator* ch;
            const std::vector<int>* others;
            int e;
            double* min_pos;
            void run(size_t pos) {
                if (pos == others->size()) {
                    double marg = ch->push(e);
                    ch->pop();
                    if (marg > 1e-12) *min_pos = std::min(*min_pos, marg);
                    return;
                }
                run(pos + 1);
                ch->push((*others)[pos]);
                run(pos + 1);
                ch->pop();
            }
        };
        Walk w{ch.get(), &others, e, &min_pos};
        w.run(0);
        if (std::isfinite(min_pos)) worst = std::max(worst, inst.costs[e] / min_pos);
    }
    return worst;
}

double sampled_small_bids_eps(const SapInstance& inst, int samples, uint64_t seed) {
    const int n = inst.n();
    const SubmodularOracle& f = *inst.oracle;
    SplitMix64 rng(seed);
    double worst = 0;
    for (int e = 0; e < n; ++e) {
        double min_pos = f.marginal(ElementSet(n), e);
        for (int it = 0; it < samples; ++it) {
            ElementSet t(n);
            for (int o = 0; o < n; ++o)
                if (o != e && (rng.next_u64() & 1)) t.add(o);
            double marg = f.marginal(t, e);
            if (marg > 1e-12) min_pos = std::min(min_pos, marg);
        }
        if (min_pos > 1e-12) worst = std::max(worst, inst.costs[e] / min_pos);
    }
    return worst;
}

}  // namespace

SolveOutcome solve_small_bids(const SapInstance& inst, double eps, const SolveOptions& opts) {
    inst.validate();
    if (eps <= 0 || eps >= 1) throw InputError("solve_small_bids: eps must lie in (0,1)");
    for (int e = 0; e < inst.n(); ++e)
        if (inst.values[e] != inst.costs[e])
            throw InputError("solve_small_bids requires v_e = b_e");

    const int n = inst.n();
    const int m = static_cast<int>(inst.parts.size());
    OraclePtr fprime = make_scaled(inst.oracle, 1.0 - eps);

    SolveOutcome out;
    out.report.mode = "small-bids";
    out.report.epsilon = eps;
    out.report.step = 1.0;

    double measured =
        n <= 14 ? measured_small_bids_eps(inst) : sampled_small_bids_eps(inst, 64, 7);
    out.report.small_bids_validated = measured <= eps + 1e-12;

    std::vector<double> x(n, 0.0), load(n, 0.0);
    std::vector<double> gamma(n, 0.0), beta(m, 0.0);
    double primal = 0;

    WaterLevelOptions wl;
    wl.sfm = opts.sfm;

    WaterLevelDecomposition dec = water_levels_alg1(*fprime, load, wl);
    for (int j = 0; j < m; ++j) {
        // Refresh gamma from the pre-arrival levels (they equal the previous
        // part's post-allocation levels).
        for (int e = 0; e < n; ++e) gamma[e] = std::max(gamma[e], price_G(dec.levels[e]));

        int pick = -1;
        double best = 0;
        double best_beta = 0;
        inst.parts[j].for_each([&](int e) {
            double util = inst.costs[e] * (1.0 - price_g(dec.levels[e]));
            best_beta = std::max(best_beta, util);
            if (dec.levels[e] < 1.0 - 1e-9 && util > best) {
                best = util;
                pick = e;
            }
        });
        beta[j] = std::max(0.0, best_beta);
        if (pick >= 0) {
            if (x[pick] != 0.0) throw InvariantError("small bids: element selected twice");
            x[pick] = 1.0;
            load[pick] = inst.costs[pick];
            primal += inst.costs[pick];
            dec = water_levels_alg1(*fprime, load, wl);
            if (opts.keep_trace) {
                double beta_sum = 0;
                for (double b : beta) beta_sum += b;
                out.report.trace.push_back({j + 1L, j, pick, 1.0, primal, beta_sum,
                                            min_kappa(inst, gamma, beta, j + 1)});
            }
        }
    }
    for (int e = 0; e < n; ++e) gamma[e] = std::max(gamma[e], price_G(dec.levels[e]));

    // The returned allocation must be feasible for the original constraints.
    WaterLevelDecomposition final_dec = water_levels_alg1(*inst.oracle, load, wl);
    if (final_dec.max_level() > 1.0 + 1e-9)
        throw InvariantError("small bids: final allocation infeasible for the original oracle");

    out.allocation.x = x;
    out.allocation.revealed_parts = m;
    out.certificate.gamma = gamma;
    out.certificate.beta = beta;
    double beta_sum = 0;
    for (double b : beta) beta_sum += b;
    out.report.primal = primal;
    out.report.dual_objective = eval_lovasz(*fprime, gamma) + beta_sum;
    out.report.dual_surrogate = out.report.dual_objective;
    out.report.micro_steps = m;
    out.report.max_water_level = final_dec.max_level();
    CertifiedBound cb = certify(out.certificate, inst, primal, out.report.dual_objective);
    out.report.kappa = cb.kappa;
    out.report.certified_ratio = cb.ratio_lower_bound;
    return out;
}

}  // namespace polyflow
