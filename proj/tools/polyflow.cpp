// Command-line front end: instance generation, water-level inspection, the
// online solvers, ranking experiments, offline optima, benchmark suites and
// the invariant verifier.
//
// Exit codes: 0 ok, 1 usage/input error, 2 invariant failure, 3 capability
// limit exceeded.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "polyflow/bench.hpp"
#include "polyflow/errors.hpp"
#include "polyflow/generators.hpp"
#include "polyflow/instance_io.hpp"
#include "polyflow/offline.hpp"
#include "polyflow/ranking.hpp"
#include "polyflow/solvers.hpp"
#include "polyflow/water_levels.hpp"

namespace {

using namespace polyflow;

Json dec_to_json(const WaterLevelDecomposition& dec) {
    Json out;
    out["w"] = dec.levels;
    Json chain = Json::array();
    for (const auto& s : dec.chain) chain.push_back(s.to_vector());
    out["chain"] = std::move(chain);
    out["densities"] = dec.densities;
    out["alpha"] = dec.alpha;
    return out;
}

int cmd_gen(const std::string& family, int n, int depth, int delta, double eps,
            const std::string& graph, uint64_t seed, double budget, const std::string& out) {
    Json doc = gen_instance(family, n, depth, delta, eps, graph, seed, budget);
    std::string text = canonical_dump(doc);
    if (out.empty())
        std::cout << text;
    else
        write_text_file(out, text);
    return 0;
}

int cmd_waterlevels(const std::string& instance_path, const std::string& loads_path,
                    const std::string& method) {
    Json doc = load_json_file(instance_path);
    OraclePtr oracle =
        doc.contains("oracle") ? parse_oracle(doc["oracle"]) : parse_oracle(doc);
    std::vector<double> loads;
    for (const auto& v : load_json_file(loads_path)) loads.push_back(v.get<double>());

    Json out;
    WaterLevelOptions opts;
    WaterLevelDecomposition dec;
    if (method == "alg1" || method == "all") {
        dec = water_levels_alg1(*oracle, loads, opts);
        out = dec_to_json(dec);
        out["method"] = "alg1";
    }
    if (method == "alg2" || method == "all") {
        WaterLevelDecomposition dec2 = water_levels_alg2(*oracle, loads, opts);
        if (method == "alg2") {
            dec = dec2;
            out = dec_to_json(dec);
            out["method"] = "alg2";
        } else {
            double diff = 0;
            for (int e = 0; e < oracle->ground_size(); ++e)
                diff = std::max(diff, std::abs(dec.levels[e] - dec2.levels[e]));
            out["checks"]["alg1_alg2_max_diff"] = diff;
            out["checks"]["alg1_alg2_agree"] = diff <= 1e-7;
        }
    }
    if (method == "brute" || (method == "all" && oracle->ground_size() <= 16)) {
        std::vector<double> w(oracle->ground_size());
        double saddle_gap = 0;
        for (int e = 0; e < oracle->ground_size(); ++e) {
            BruteWaterLevel b = water_level_brute(*oracle, loads, e);
            w[e] = b.max_min;
            saddle_gap = std::max(saddle_gap, std::abs(b.max_min - b.min_max));
        }
        if (method == "brute") {
            out["w"] = w;
            out["method"] = "brute";
        } else {
            double diff = 0;
            for (int e = 0; e < oracle->ground_size(); ++e)
                diff = std::max(diff, std::abs(dec.levels[e] - w[e]));
            out["checks"]["alg1_brute_max_diff"] = diff;
            out["checks"]["saddle_gap"] = saddle_gap;
        }
    }
    if (method == "all") {
        KktReport kkt = verify_sua_kkt(*oracle, loads, dec);
        out["checks"]["sua_kkt"] = kkt.pass;
    }
    std::cout << canonical_dump(out);
    return 0;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trace file: " + path);
    out << "step,part,element,delta,primal,dual,min_kappa\n";
    char buf[64];
    for (const auto& r : trace) {
        out << r.step << ',' << r.part << ',' << r.element << ',';
        auto num = [&](double v) {
            snprintf(buf, sizeof buf, "%.17g", v);
            out << buf;
        };
        num(r.delta);
        out << ',';
        num(r.primal);
        out << ',';
        num(r.dual);
        out << ',';
        num(r.min_kappa);
        out << '\n';
    }
}

int cmd_solve(const std::string& instance_path, const std::string& mode, double step, double eps,
              const std::string& trace_path) {
    SapInstance inst = parse_sap(load_json_file(instance_path));
    SolveOptions opts;
    opts.keep_trace = !trace_path.empty();
    SolveOutcome outcome;
    if (mode == "frac")
        outcome = solve_fractional(inst, step, opts);
    else if (mode == "mi")
        outcome = solve_matroid_intersection(inst, step, opts);
    else if (mode == "small-bids")
        outcome = solve_small_bids(inst, eps, opts);
    else
        throw InputError("unknown mode '" + mode + "' (frac|mi|small-bids)");

    if (!trace_path.empty()) write_trace_csv(trace_path, outcome.report.trace);

    Json out;
    out["mode"] = outcome.report.mode;
    out["primal"] = outcome.report.primal;
    out["dual_objective"] = outcome.report.dual_objective;
    out["dual_surrogate"] = outcome.report.dual_surrogate;
    out["kappa"] = outcome.report.kappa;
    out["certified_ratio"] = outcome.report.certified_ratio;
    out["micro_steps"] = outcome.report.micro_steps;
    out["max_water_level"] = outcome.report.max_water_level;
    out["x"] = outcome.allocation.x;
    if (outcome.report.mode == "small-bids") {
        out["epsilon"] = outcome.report.epsilon;
        out["small_bids_validated"] = outcome.report.small_bids_validated;
    }
    std::cout << canonical_dump(out);
    return 0;
}

int cmd_ranking(const std::string& instance_path, int trials, uint64_t seed,
                const std::string& dump_path) {
    OswmInstance inst = parse_oswm(load_json_file(instance_path));
    MonteCarloRatio mc = monte_carlo_ratio(inst, trials, seed, !dump_path.empty());
    if (!dump_path.empty()) {
        std::ofstream out(dump_path);
        if (!out) throw InputError("cannot write dump file: " + dump_path);
        out << "trial,seed_hash,welfare,opt,ratio\n";
        SplitMix64 master(seed);
        char buf[64];
        for (int t = 0; t < mc.trials; ++t) {
            uint64_t h = master.split(static_cast<uint64_t>(t)).state();
            double welfare = mc.ratios[t] * mc.opt;
            out << t << ',' << h << ',';
            snprintf(buf, sizeof buf, "%.17g", welfare);
            out << buf << ',';
            snprintf(buf, sizeof buf, "%.17g", mc.opt);
            out << buf << ',';
            snprintf(buf, sizeof buf, "%.17g", mc.ratios[t]);
            out << buf << '\n';
        }
    }
    Json out;
    out["trials"] = mc.trials;
    out["mean_ratio"] = mc.mean;
    out["stderr"] = mc.stderr_;
    out["opt"] = mc.opt;
    std::cout << canonical_dump(out);
    return 0;
}

int cmd_offline(const std::string& instance_path, const std::string& problem) {
    Json doc = load_json_file(instance_path);
    Json out;
    if (problem == "oswm" || (problem == "auto" && is_oswm_doc(doc))) {
        OswmInstance inst = parse_oswm(doc);
        OswmOptimum opt = oswm_opt(inst);
        out["opt"] = opt.welfare;
        out["x"] = opt.assignment;
        out["backend"] = "exhaustive";
    } else {
        SapInstance inst = parse_sap(doc);
        LpSolution lp = lp_opt_fractional(inst);
        out["opt"] = lp.objective;
        out["x"] = lp.x;
        out["backend"] = lp.backend;
    }
    std::cout << canonical_dump(out);
    return 0;
}

int cmd_bench(const std::string& suite_path, const std::string& out_path, int threads) {
    std::vector<BenchRow> rows = parse_suite(load_json_file(suite_path));
    BenchReport report = run_bench(rows, threads);
    if (!out_path.empty()) {
        write_text_file(out_path + ".json", canonical_dump(report.to_json()));
        write_text_file(out_path + ".csv", report.to_csv());
    }
    std::cout << report.to_csv();
    if (!report.all_pass) {
        std::cerr << "bench: at least one threshold failed\n";
        return 2;
    }
    return 0;
}

int cmd_verify(const std::string& instance_path, int samples, uint64_t seed) {
    Json doc = load_json_file(instance_path);
    bool ok = true;
    auto check = [&](const std::string& name, bool pass) {
        std::printf("%-28s %s\n", name.c_str(), pass ? "PASS" : "FAIL");
        ok = ok && pass;
    };

    if (is_oswm_doc(doc)) {
        OswmInstance inst = parse_oswm(doc);
        for (int i = 0; i < inst.agents(); ++i) {
            bool exhaustive = inst.items <= 14;
            SubmodularityReport rep =
                verify_submodular(*inst.matroids[i], exhaustive, samples, seed);
            check("agent " + std::to_string(i) + " submodular", rep.pass);
        }
        SplitMix64 rng(seed);
        bool perusal_ok = true;
        for (int t = 0; t < 25; ++t) {
            std::vector<double> seeds(inst.agents());
            for (double& r : seeds) r = rng.next_double();
            perusal_ok = perusal_ok &&
                         ranking_run(inst, seeds).assignment == perusal_run(inst, seeds).assignment;
        }
        check("ranking == perusal (25 runs)", perusal_ok);
        if (!ok) return 2;
        return 0;
    }

    SapInstance inst = parse_sap(doc);
    const int n = inst.n();
    bool exhaustive = n <= 14;
    SubmodularityReport rep = verify_submodular(*inst.oracle, exhaustive, samples, seed);
    check(exhaustive ? "submodular (exhaustive)" : "submodular (sampled)", rep.pass);

    SplitMix64 rng(seed);
    bool agree = true, kkt_ok = true, duality_ok = true, mono_ok = true, feas_ok = true;
    for (int t = 0; t < 10; ++t) {
        std::vector<double> loads(n);
        for (double& v : loads) v = rng.next_double();
        WaterLevelDecomposition d1 = water_levels_alg1(*inst.oracle, loads);
        WaterLevelDecomposition d2 = water_levels_alg2(*inst.oracle, loads);
        for (int e = 0; e < n; ++e)
            agree = agree && std::abs(d1.levels[e] - d2.levels[e]) <= 1e-7;
        if (n <= 12)
            for (int e = 0; e < n; ++e) {
                BruteWaterLevel b = water_level_brute(*inst.oracle, loads, e);
                agree = agree && std::abs(d1.levels[e] - b.max_min) <= 1e-7 &&
                        std::abs(b.max_min - b.min_max) <= 1e-7;
            }
        kkt_ok = kkt_ok && verify_sua_kkt(*inst.oracle, loads, d1).pass;
        double lhs = eval_lovasz(*inst.oracle, d1.levels);
        double rhs = 0;
        for (double v : loads) rhs += v;
        duality_ok = duality_ok && std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, rhs);
        // Monotonicity under one random coordinate increase.
        std::vector<double> bigger = loads;
        bigger[rng.next_below(static_cast<uint64_t>(n))] += rng.next_double();
        WaterLevelDecomposition d3 = water_levels_alg1(*inst.oracle, bigger);
        for (int e = 0; e < n; ++e) mono_ok = mono_ok && d3.levels[e] >= d1.levels[e] - 1e-9;
        if (n <= 12) {
            FeasibilityWitness w = brute_force_feasibility(*inst.oracle, loads);
            feas_ok = feas_ok && (w.feasible == (d1.max_level() <= 1.0 + 1e-9));
        }
    }
    check("water levels agree", agree);
    check("sua kkt", kkt_ok);
    check("lovasz duality", duality_ok);
    check("monotonicity", mono_ok);
    if (n <= 12) check("feasibility indication", feas_ok);
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyflow: polymatroid water levels and online assignment solvers"};
    app.require_subcommand(1);

    // gen
    std::string family = "upper-triangular", graph = "triangle", out_path;
    int n = 5, depth = 2, delta = 1, trials = 2000, threads = 0, samples = 5000;
    double eps = 0.05, step = 1e-3, budget = 50.0;
    uint64_t seed = 1;
    auto* gen = app.add_subcommand("gen", "generate an instance file");
    gen->add_option("--family", family,
                    "upper-triangular | adwords-laminar | adwords-triangular | "
                    "matroid-coloring | random-polymatroid | oswm-random | oswm-triangular");
    gen->add_option("--n", n, "size parameter");
    gen->add_option("--depth", depth, "laminar tree depth");
    gen->add_option("--delta", delta, "number of colors / items");
    gen->add_option("--eps", eps, "small-bids parameter");
    gen->add_option("--graph", graph, "triangle | path:k | cycle:k | complete:k");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--budget", budget, "bidder budget (adwords-triangular)");
    gen->add_option("--out", out_path, "output path (stdout when omitted)");

    // waterlevels
    std::string instance_path, loads_path, method = "all";
    auto* wl = app.add_subcommand("waterlevels", "compute water levels of a load vector");
    wl->add_option("--instance", instance_path, "instance or oracle JSON")->required();
    wl->add_option("--loads", loads_path, "JSON array of loads")->required();
    wl->add_option("--method", method, "alg1 | alg2 | brute | all");

    // solve
    std::string mode = "frac", trace_path;
    auto* solve = app.add_subcommand("solve", "run an online solver");
    solve->add_option("--instance", instance_path, "instance JSON")->required();
    solve->add_option("--mode", mode, "frac | mi | small-bids");
    solve->add_option("--step", step, "micro-step size");
    solve->add_option("--eps", eps, "small-bids parameter");
    solve->add_option("--trace", trace_path, "per-step CSV trace output");

    // ranking
    std::string dump_path;
    auto* rank = app.add_subcommand("ranking", "Monte Carlo ranking experiment");
    rank->add_option("--instance", instance_path, "OSWM instance JSON")->required();
    rank->add_option("--trials", trials, "number of trials");
    rank->add_option("--seed", seed, "master seed");
    rank->add_option("--dump-runs", dump_path, "per-trial CSV output");

    // offline
    std::string problem = "auto";
    auto* off = app.add_subcommand("offline", "exact offline optimum");
    off->add_option("--instance", instance_path, "instance JSON")->required();
    off->add_option("--problem", problem, "sap | oswm | auto");

    // bench
    std::string suite_path;
    auto* bench = app.add_subcommand("bench", "run a benchmark suite manifest");
    bench->add_option("--suite", suite_path, "suite manifest JSON")->required();
    bench->add_option("--out", out_path, "output prefix for .json/.csv reports");
    bench->add_option("--threads", threads, "worker threads (0 = auto)");

    // verify
    auto* verify = app.add_subcommand("verify", "run the invariant suite on an instance");
    verify->add_option("--instance", instance_path, "instance JSON")->required();
    verify->add_option("--samples", samples, "sampled checks for large instances");
    verify->add_option("--seed", seed, "seed for randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(family, n, depth, delta, eps, graph, seed, budget, out_path);
        if (wl->parsed()) return cmd_waterlevels(instance_path, loads_path, method);
        if (solve->parsed()) return cmd_solve(instance_path, mode, step, eps, trace_path);
        if (rank->parsed()) return cmd_ranking(instance_path, trials, seed, dump_path);
        if (off->parsed()) return cmd_offline(instance_path, problem);
        if (bench->parsed()) return cmd_bench(suite_path, out_path, threads);
        if (verify->parsed()) return cmd_verify(instance_path, samples, seed);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return 2;
    } catch (const CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
