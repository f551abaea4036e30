#include "polyflow/offline.hpp"

#include <algorithm>
#include <cmath>

#include "polyflow/errors.hpp"
#include "polyflow/sfm.hpp"

namespace polyflow {

int SapInstance::part_of(int e) const {
    for (size_t j = 0; j < parts.size(); ++j)
        if (parts[j].contains(e)) return static_cast<int>(j);
    return -1;
}

bool SapInstance::uniform_unit() const {
    for (double v : values)
        if (v != 1.0) return false;
    for (double b : costs)
        if (b != 1.0) return false;
    return true;
}

void SapInstance::validate() const {
    if (!oracle) throw InputError("instance: missing oracle");
    const int n = oracle->ground_size();
    if (static_cast<int>(values.size()) != n || static_cast<int>(costs.size()) != n)
        throw InputError("instance: values/costs size mismatch");
    for (int e = 0; e < n; ++e) {
        if (values[e] <= 0) throw InputError("instance: values must be positive");
        if (costs[e] <= 0) throw InputError("instance: costs must be positive");
    }
    ElementSet seen(n);
    for (const ElementSet& q : parts) {
        if (q.universe_size() != n) throw InputError("instance: part universe mismatch");
        if (seen.intersects(q)) throw InputError("instance: parts overlap");
        seen |= q;
    }
    if (seen != ElementSet::full(n)) throw InputError("instance: parts do not cover the ground set");
    ElementSet empty(n);
    for (int e = 0; e < n; ++e)
        if (oracle->marginal(empty, e) <= 0)
            throw InputError("instance: element " + std::to_string(e) +
                             " has f({e}) = 0 and must be removed");
}

void OswmInstance::validate() const {
    if (matroids.size() != weights.size())
        throw InputError("oswm instance: weights/matroids size mismatch");
    for (const auto& m : matroids) {
        if (!m) throw InputError("oswm instance: missing matroid oracle");
        if (m->ground_size() != items)
            throw InputError("oswm instance: matroid ground set must equal item count");
    }
    for (double a : weights)
        if (a < 0 || !std::isfinite(a)) throw InputError("oswm instance: negative agent weight");
}

// ---------------------------------------------------------------------------

SimplexResult simplex_solve(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& rhs,
                            const std::vector<double>& objective) {
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(objective.size());
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw InputError("simplex: ragged matrix");
        if (rhs[i] < 0) throw InputError("simplex: rhs must be nonnegative");
    }
    const int width = n + m + 1;  // structural + slack + rhs
    std::vector<std::vector<double>> tab(m + 1, std::vector<double>(width, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) tab[i][j] = rows[i][j];
        tab[i][n + i] = 1.0;
        tab[i][width - 1] = rhs[i];
    }
    for (int j = 0; j < n; ++j) tab[m][j] = -objective[j];

    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    const double eps = 1e-9;
    const long max_pivots = 50L * (m + n) * (m + n) + 10000;
    for (long pivots = 0; pivots < max_pivots; ++pivots) {
        // Bland: entering = lowest-index column with negative reduced cost.
        int enter = -1;
        for (int j = 0; j < n + m; ++j)
            if (tab[m][j] < -eps) {
                enter = j;
                break;
            }
        if (enter < 0) {
            SimplexResult res;
            res.optimal = true;
            res.x.assign(n, 0.0);
            for (int i = 0; i < m; ++i)
                if (basis[i] < n) res.x[basis[i]] = tab[i][width - 1];
            res.row_duals.assign(m, 0.0);
            for (int i = 0; i < m; ++i) res.row_duals[i] = tab[m][n + i];
            res.objective = tab[m][width - 1];
            return res;
        }
        // Bland: leaving = lowest basis index among min-ratio rows.
        int leave = -1;
        double best_ratio = 0;
        for (int i = 0; i < m; ++i) {
            if (tab[i][enter] <= eps) continue;
            double ratio = tab[i][width - 1] / tab[i][enter];
            if (leave < 0 || ratio < best_ratio - 1e-12 ||
                (std::abs(ratio - best_ratio) <= 1e-12 && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave < 0) throw InvariantError("simplex: unbounded program");
        double piv = tab[leave][enter];
        for (int j = 0; j < width; ++j) tab[leave][j] /= piv;
        for (int i = 0; i <= m; ++i) {
            if (i == leave) continue;
            double factor = tab[i][enter];
            if (factor == 0) continue;
            for (int j = 0; j < width; ++j) tab[i][j] -= factor * tab[leave][j];
        }
        basis[leave] = enter;
    }
    throw InvariantError("simplex: pivot limit exceeded");
}

// ---------------------------------------------------------------------------

namespace {

struct ActiveLp {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    size_t n_parts = 0;
    std::vector<ElementSet> sets;  // aligned with rows after the part rows
};

void add_set_row(ActiveLp& lp, const SapInstance& inst, const ElementSet& s) {
    std::vector<double> row(inst.n(), 0.0);
    s.for_each([&](int e) { row[e] = inst.costs[e]; });
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(inst.oracle->eval(s));
    lp.sets.push_back(s);
}

LpSolution finish(const SapInstance& inst, const ActiveLp& lp, const SimplexResult& sr,
                  const std::string& backend, double final_slack) {
    LpSolution sol;
    sol.x = sr.x;
    sol.objective = sr.objective;
    sol.backend = backend;
    sol.final_slack = final_slack;
    sol.part_duals.assign(lp.n_parts, 0.0);
    for (size_t i = 0; i < lp.n_parts; ++i) sol.part_duals[i] = sr.row_duals[i];
    for (size_t i = 0; i < lp.sets.size(); ++i) {
        double dual = sr.row_duals[lp.n_parts + i];
        if (dual > 1e-12) {
            sol.active_sets.push_back(lp.sets[i]);
            sol.set_duals.push_back(dual);
        }
    }
    return sol;
}

}  // namespace

LpSolution lp_opt_fractional(const SapInstance& inst, const LpOptions& opts) {
    inst.validate();
    const int n = inst.n();

    bool exhaustive = false;
    switch (opts.backend) {
        case LpOptions::Backend::Exhaustive:
            if (n > 16)
                throw CapabilityError("lp_opt: exhaustive backend requires n <= 16");
            exhaustive = true;
            break;
        case LpOptions::Backend::CuttingPlane:
            exhaustive = false;
            break;
        case LpOptions::Backend::Auto:
        default:
            exhaustive = n <= 12;
            break;
    }

    ActiveLp lp;
    lp.n_parts = inst.parts.size();
    for (const ElementSet& q : inst.parts) {
        std::vector<double> row(n, 0.0);
        q.for_each([&](int e) { row[e] = 1.0; });
        lp.rows.push_back(std::move(row));
        lp.rhs.push_back(1.0);
    }
    // Singleton rows keep the first relaxation bounded.
    for (int e = 0; e < n; ++e) add_set_row(lp, inst, ElementSet::of(n, {e}));

    SfmOptions sep_opts;
    sep_opts.exhaustive_limit = 14;

    double worst_slack = 0;
    for (int round = 0; round < 4 * n + 64; ++round) {
        SimplexResult sr = simplex_solve(lp.rows, lp.rhs, inst.values);
        if (!sr.optimal) throw InvariantError("lp_opt: simplex failed");

        std::vector<double> load(n);
        for (int e = 0; e < n; ++e) load[e] = inst.costs[e] * sr.x[e];

        // Separation: most violated polymatroid constraint.
        double slack;
        ElementSet violator(n);
        if (exhaustive) {
            FeasibilityWitness w = brute_force_feasibility(*inst.oracle, load);
            slack = w.min_slack;
            violator = w.witness;
        } else {
            SfmProblem prob;
            prob.f = inst.oracle.get();
            prob.live = ElementSet::full(n);
            prob.weights = &load;
            SfmResult res = sfm_min(prob, sep_opts);
            slack = res.value;
            violator = res.minimizer;
        }
        worst_slack = slack;
        if (slack >= -opts.separation_tol)
            return finish(inst, lp, sr, exhaustive ? "exhaustive" : "cutting-plane", slack);
        add_set_row(lp, inst, violator);
    }
    throw InvariantError("lp_opt: constraint generation did not converge");
}

// ---------------------------------------------------------------------------

namespace {

struct OswmSearch {
    const OswmInstance* inst;
    std::vector<std::unique_ptr<ChainEvaluator>> chains;  // rank chain per agent
    std::vector<int> assignment, best_assignment;
    double welfare = 0, best = -1;
    long nodes = 0, node_limit = 0;

    void run(int item) {
        if (++nodes > node_limit)
            throw CapabilityError("oswm_opt: search budget exceeded; use lp_opt as a bound");
        const int m = inst->items;
        if (item == m) {
            if (welfare > best) {
                best = welfare;
                best_assignment = assignment;
            }
            return;
        }
        // Admissible bound: each remaining item can add at most the largest
        // weight among agents it is currently available to (availability only
        // shrinks as allocations grow).
        double bound = welfare;
        for (int j = item; j < m; ++j) {
            double add = 0;
            for (int i = 0; i < inst->agents(); ++i) {
                if (inst->weights[i] <= add) continue;
                double marg = chains[i]->push(j);
                chains[i]->pop();
                if (marg > 0.5) add = inst->weights[i];
            }
            bound += add;
        }
        if (bound <= best + 1e-12) return;

        for (int i = 0; i < inst->agents(); ++i) {
            double marg = chains[i]->push(item);
            if (marg > 0.5) {
                assignment[item] = i;
                welfare += inst->weights[i];
                run(item + 1);
                welfare -= inst->weights[i];
                assignment[item] = -1;
            }
            chains[i]->pop();
        }
        run(item + 1);  // leave unassigned
    }
};

}  // namespace

OswmOptimum oswm_opt(const OswmInstance& inst) {
    inst.validate();
    const int n = inst.agents();
    const int m = inst.items;

    OswmOptimum out;
    out.assignment.assign(m, -1);
    if (n == 0 || m == 0) return out;

    if (n == 1) {
        // Greedy over one matroid is optimal.
        auto ch = inst.matroids[0]->chain();
        double rank = 0;
        for (int j = 0; j < m; ++j) {
            double marg = ch->push(j);
            if (marg > 0.5)
                out.assignment[j] = 0;
            else
                ch->pop();
            rank += marg > 0.5 ? 1.0 : 0.0;
        }
        out.welfare = inst.weights[0] * rank;
        return out;
    }

    double states = std::pow(static_cast<double>(n), static_cast<double>(m));
    if (states > 1e7)
        throw CapabilityError(
            "oswm_opt: n^m exceeds 1e7; use lp_opt_fractional for an upper bound");

    OswmSearch search;
    search.inst = &inst;
    for (const auto& mat : inst.matroids) search.chains.push_back(mat->chain());
    search.assignment.assign(m, -1);
    search.best_assignment.assign(m, -1);
    search.node_limit = 200'000'000;
    search.run(0);
    out.assignment = search.best_assignment;
    out.welfare = std::max(search.best, 0.0);
    return out;
}

// ---------------------------------------------------------------------------

FeasibilityWitness brute_force_feasibility(const SubmodularOracle& f,
                                           const std::vector<double>& load) {
    const int n = f.ground_size();
    if (n > 20) throw CapabilityError("brute_force_feasibility requires n <= 20");
    if (static_cast<int>(load.size()) != n)
        throw InputError("brute_force_feasibility: load size mismatch");

    // DFS over subsets tracking f(S) - load(S).
    struct Dfs {
        const std::vector<double>* load;
        ChainEvaluator* ch;
        double best = 0;
        ElementSet best_set, current;
        int n;
        void run(int pos, double slack) {
            if (slack < best) {
                best = slack;
                best_set = current;
            }
            if (pos == n) return;
            run(pos + 1, slack);
            double m = ch->push(pos);
            current.add(pos);
            run(pos + 1, slack + m - (*load)[pos]);
            current.remove(pos);
            ch->pop();
        }
    };
    auto ch = f.chain();
    Dfs dfs;
    dfs.load = &load;
    dfs.ch = ch.get();
    dfs.n = n;
    dfs.best_set = ElementSet(n);
    dfs.current = ElementSet(n);
    dfs.run(0, 0.0);

    FeasibilityWitness w;
    w.min_slack = dfs.best;
    w.witness = dfs.best_set;
    w.feasible = dfs.best >= -tightness_slack(f.eval(dfs.best_set));
    return w;
}

}  // namespace polyflow
