#include "polyflow/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include "polyflow/errors.hpp"
#include "polyflow/offline.hpp"
#include "polyflow/rng.hpp"
#include "polyflow/solvers.hpp"

namespace polyflow {

double RankingRun::dual_objective(const OswmInstance& inst) const {
    double acc = 0;
    for (int i = 0; i < inst.agents(); ++i)
        acc += alpha[i] * inst.matroids[i]->eval(span_sets[i]);
    for (double b : beta) acc += std::max(b, 0.0);
    return acc;
}

ElementSet span_of(const SubmodularOracle& matroid, const ElementSet& u) {
    const int m = matroid.ground_size();
    ElementSet span = u;
    double rank = matroid.eval(u);
    for (int j = 0; j < m; ++j) {
        if (u.contains(j)) continue;
        ElementSet with = u;
        with.add(j);
        if (matroid.eval(with) <= rank + 0.5) span.add(j);
    }
    return span;
}

namespace {

void validate_seeds(const OswmInstance& inst, const std::vector<double>& seeds) {
    if (static_cast<int>(seeds.size()) != inst.agents())
        throw InputError("ranking: seed vector size mismatch");
    for (double r : seeds)
        if (r < 0 || r > 1) throw InputError("ranking: seeds must lie in [0,1]");
}

RankingRun finish_run(const OswmInstance& inst, std::vector<double> seeds,
                      std::vector<int> assignment, std::vector<ElementSet> assigned,
                      std::vector<double> beta) {
    RankingRun run;
    run.seeds = std::move(seeds);
    run.assignment = std::move(assignment);
    run.assigned = std::move(assigned);
    run.beta = std::move(beta);
    run.alpha.resize(inst.agents());
    run.span_sets.reserve(inst.agents());
    run.welfare = 0;
    for (int i = 0; i < inst.agents(); ++i) {
        run.alpha[i] = inst.weights[i] * price_g(run.seeds[i]);
        run.span_sets.push_back(span_of(*inst.matroids[i], run.assigned[i]));
        run.welfare += inst.weights[i] * inst.matroids[i]->eval(run.assigned[i]);
    }
    return run;
}

// Agents ordered by decreasing priority a_i(1 - g(r_i)), ties by id.
std::vector<int> priority_order(const OswmInstance& inst, const std::vector<double>& seeds) {
    std::vector<int> order(inst.agents());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> prio(inst.agents());
    for (int i = 0; i < inst.agents(); ++i)
        prio[i] = inst.weights[i] * (1.0 - price_g(seeds[i]));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return prio[a] != prio[b] ? prio[a] > prio[b] : a < b;
    });
    return order;
}

}  // namespace

RankingRun ranking_run(const OswmInstance& inst, const std::vector<double>& seeds) {
    inst.validate();
    validate_seeds(inst, seeds);
    const int n = inst.agents();
    const int m = inst.items;

    std::vector<int> order = priority_order(inst, seeds);
    std::vector<std::unique_ptr<ChainEvaluator>> chains;
    chains.reserve(n);
    for (const auto& mat : inst.matroids) chains.push_back(mat->chain());

    std::vector<int> assignment(m, -1);
    std::vector<ElementSet> assigned(n, ElementSet(m));
    std::vector<double> beta(m, 0.0);
    for (int j = 0; j < m; ++j) {
        for (int i : order) {
            double marg = chains[i]->push(j);
            if (marg > 0.5) {
                assignment[j] = i;
                assigned[i].add(j);
                beta[j] = inst.weights[i] * (1.0 - price_g(seeds[i]));
                break;
            }
            chains[i]->pop();
        }
    }
    return finish_run(inst, seeds, std::move(assignment), std::move(assigned), std::move(beta));
}

RankingRun perusal_run(const OswmInstance& inst, const std::vector<double>& seeds) {
    inst.validate();
    validate_seeds(inst, seeds);
    const int n = inst.agents();
    const int m = inst.items;

    std::vector<int> assignment(m, -1);
    std::vector<ElementSet> assigned(n, ElementSet(m));
    std::vector<double> beta(m, 0.0);
    ElementSet claimed(m);
    for (int i : priority_order(inst, seeds)) {
        auto ch = inst.matroids[i]->chain();
        for (int j = 0; j < m; ++j) {
            if (claimed.contains(j)) continue;
            double marg = ch->push(j);
            if (marg > 0.5) {
                claimed.add(j);
                assignment[j] = i;
                assigned[i].add(j);
                beta[j] = inst.weights[i] * (1.0 - price_g(seeds[i]));
            } else {
                ch->pop();
            }
        }
    }
    return finish_run(inst, seeds, std::move(assignment), std::move(assigned), std::move(beta));
}

MonteCarloRatio monte_carlo_ratio(const OswmInstance& inst, int trials, uint64_t seed,
                                  bool keep_per_trial, int threads) {
    inst.validate();
    OswmOptimum opt = oswm_opt(inst);
    if (opt.welfare <= 0)
        throw InputError("monte_carlo_ratio: offline optimum is zero");

    SplitMix64 master(seed);
    std::vector<double> ratios(trials);
    auto run_range = [&](int lo, int hi) {
        for (int t = lo; t < hi; ++t) {
            SplitMix64 rng = master.split(static_cast<uint64_t>(t));
            std::vector<double> seeds(inst.agents());
            for (double& r : seeds) r = rng.next_double();
            RankingRun run = ranking_run(inst, seeds);
            ratios[t] = run.welfare / opt.welfare;
        }
    };

    int workers = threads > 0 ? threads
                              : static_cast<int>(std::min<unsigned>(
                                    std::thread::hardware_concurrency(), 8));
    if (workers <= 1 || trials < 64) {
        run_range(0, trials);
    } else {
        std::vector<std::future<void>> futures;
        int chunk = (trials + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            int lo = w * chunk, hi = std::min(trials, lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, run_range, lo, hi));
        }
        for (auto& f : futures) f.get();
    }

    MonteCarloRatio out;
    out.trials = trials;
    out.opt = opt.welfare;
    double sum = 0, sumsq = 0;
    for (double r : ratios) {
        sum += r;
        sumsq += r * r;
    }
    out.mean = trials > 0 ? sum / trials : 0;
    if (trials > 1) {
        double var = std::max(0.0, (sumsq - trials * out.mean * out.mean) / (trials - 1));
        out.stderr_ = std::sqrt(var / trials);
    }
    if (keep_per_trial) out.ratios = std::move(ratios);
    return out;
}

double critical_threshold(const OswmInstance& inst, std::vector<double> seeds, int agent,
                          int item, double resolution) {
    inst.validate();
    if (agent < 0 || agent >= inst.agents()) throw InputError("critical_threshold: bad agent");
    if (item < 0 || item >= inst.items) throw InputError("critical_threshold: bad item");

    auto spanned = [&](double r) {
        seeds[agent] = r;
        RankingRun run = ranking_run(inst, seeds);
        return run.span_sets[agent].contains(item);
    };
    if (!spanned(0.0)) return 0.0;  // sup of the empty set
    if (spanned(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > resolution) {
        double mid = 0.5 * (lo + hi);
        if (spanned(mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace polyflow
