#pragma once

#include <string>
#include <vector>

#include "polyflow/instance_io.hpp"

namespace polyflow {

// One manifest row: an instance (inline generator spec or file path), the
// solver to run, its parameters, and an optional ratio threshold that gates
// the exit code.
struct BenchRow {
    std::string id;
    std::string solver;  // frac | mi | small-bids | ranking
    double step = 1e-3;
    double eps = 0.05;
    int trials = 2000;
    uint64_t seed = 1;
    double min_ratio = -1;  // threshold; negative = unchecked
    Json instance;          // resolved instance document
};

struct BenchResult {
    std::string id, solver;
    double primal = 0;
    double opt = 0;
    double ratio = 0;
    double certified_ratio = 0;
    double wall_seconds = 0;
    bool pass = true;
};

struct BenchReport {
    std::vector<BenchResult> rows;
    bool all_pass = true;
    Json to_json() const;
    std::string to_csv() const;
};

// Parse a suite manifest {"rows": [...]}; generator specs are resolved here
// so the run itself is deterministic.
std::vector<BenchRow> parse_suite(const Json& manifest);

// Run every row (instances in parallel, report order fixed by row index).
BenchReport run_bench(const std::vector<BenchRow>& rows, int threads = 0);

}  // namespace polyflow
