#include "polyflow/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <future>
#include <sstream>
#include <thread>

#include "polyflow/errors.hpp"
#include "polyflow/generators.hpp"
#include "polyflow/offline.hpp"
#include "polyflow/ranking.hpp"
#include "polyflow/solvers.hpp"

namespace polyflow {

std::vector<BenchRow> parse_suite(const Json& manifest) {
    std::vector<BenchRow> rows;
    if (!manifest.contains("rows") || !manifest["rows"].is_array())
        throw InputError("suite manifest needs a 'rows' array");
    int counter = 0;
    for (const auto& r : manifest["rows"]) {
        BenchRow row;
        row.id = r.value("id", "row-" + std::to_string(counter));
        row.solver = r.value("solver", "frac");
        row.step = r.value("step", 1e-3);
        row.eps = r.value("eps", 0.05);
        row.trials = r.value("trials", 2000);
        row.seed = r.value("seed", static_cast<uint64_t>(counter + 1));
        row.min_ratio = r.value("min_ratio", -1.0);
        if (r.contains("instance") && r["instance"].is_string()) {
            row.instance = load_json_file(r["instance"].get<std::string>());
        } else if (r.contains("instance")) {
            row.instance = r["instance"];
        } else if (r.contains("gen")) {
            const Json& g = r["gen"];
            row.instance = gen_instance(
                g.value("family", "upper-triangular"), g.value("n", 5), g.value("depth", 2),
                g.value("delta", 1), g.value("eps", 0.05), g.value("graph", "triangle"),
                g.value("seed", static_cast<uint64_t>(counter + 11)), g.value("budget", 50.0));
        } else {
            throw InputError("suite row needs 'instance' or 'gen'");
        }
        rows.push_back(std::move(row));
        ++counter;
    }
    return rows;
}

namespace {

BenchResult run_row(const BenchRow& row) {
    BenchResult res;
    res.id = row.id;
    res.solver = row.solver;
    auto start = std::chrono::steady_clock::now();

    if (row.solver == "ranking") {
        OswmInstance inst = parse_oswm(row.instance);
        MonteCarloRatio mc = monte_carlo_ratio(inst, row.trials, row.seed);
        res.opt = mc.opt;
        res.primal = mc.mean * mc.opt;
        res.ratio = mc.mean;
        res.certified_ratio = mc.mean - 3 * mc.stderr_;
    } else {
        SapInstance inst = parse_sap(row.instance);
        LpOptions lp_opts;
        LpSolution lp = lp_opt_fractional(inst, lp_opts);
        res.opt = lp.objective;
        SolveOutcome outcome;
        if (row.solver == "frac")
            outcome = solve_fractional(inst, row.step);
        else if (row.solver == "mi")
            outcome = solve_matroid_intersection(inst, row.step);
        else if (row.solver == "small-bids")
            outcome = solve_small_bids(inst, row.eps);
        else
            throw InputError("unknown solver '" + row.solver + "'");
        res.primal = outcome.report.primal;
        res.ratio = res.opt > 0 ? res.primal / res.opt : 1.0;
        res.certified_ratio = outcome.report.certified_ratio;
    }

    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = row.min_ratio < 0 || res.ratio >= row.min_ratio;
    return res;
}

}  // namespace

BenchReport run_bench(const std::vector<BenchRow>& rows, int threads) {
    BenchReport report;
    report.rows.resize(rows.size());
    int workers = threads > 0 ? threads
                              : static_cast<int>(std::min<size_t>(
                                    std::max(1u, std::thread::hardware_concurrency()),
                                    rows.size()));
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= rows.size()) break;
            report.rows[i] = run_row(rows[i]);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    // Rows sorted by instance id for the report; computation order does not
    // affect the content.
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const BenchResult& a, const BenchResult& b) { return a.id < b.id; });
    for (const auto& r : report.rows) report.all_pass = report.all_pass && r.pass;
    return report;
}

Json BenchReport::to_json() const {
    Json rows_json = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["id"] = r.id;
        row["solver"] = r.solver;
        row["primal"] = r.primal;
        row["opt"] = r.opt;
        row["ratio"] = r.ratio;
        row["certified_ratio"] = r.certified_ratio;
        row["wall_seconds"] = r.wall_seconds;
        row["pass"] = r.pass;
        rows_json.push_back(std::move(row));
    }
    Json doc;
    doc["rows"] = std::move(rows_json);
    doc["all_pass"] = all_pass;
    return doc;
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    out << "id,solver,primal,opt,ratio,certified_ratio,wall_seconds,pass\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.id << ',' << r.solver << ',';
        auto num = [&](double v) {
            snprintf(buf, sizeof buf, "%.17g", v);
            out << buf;
        };
        num(r.primal);
        out << ',';
        num(r.opt);
        out << ',';
        num(r.ratio);
        out << ',';
        num(r.certified_ratio);
        out << ',';
        num(r.wall_seconds);
        out << ',' << (r.pass ? "1" : "0") << '\n';
    }
    return out.str();
}

}  // namespace polyflow
