#include "polyflow/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "polyflow/errors.hpp"
#include "polyflow/rng.hpp"

namespace polyflow {

namespace {

Json sap_doc(int n, Json oracle, std::vector<double> values, std::vector<double> costs,
             const std::vector<std::vector<int>>& parts) {
    Json doc;
    doc["ground"] = n;
    doc["oracle"] = std::move(oracle);
    doc["values"] = values;
    doc["costs"] = costs;
    doc["parts"] = parts;
    return doc;
}

std::pair<int, std::vector<std::pair<int, int>>> named_graph(const std::string& name) {
    auto parse_k = [&](const std::string& prefix) {
        return std::stoi(name.substr(prefix.size()));
    };
    if (name == "triangle") return {3, {{0, 1}, {1, 2}, {2, 0}}};
    if (name.rfind("path:", 0) == 0) {
        int k = parse_k("path:");
        if (k < 2) throw InputError("path graph needs >= 2 vertices");
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i + 1 < k; ++i) edges.push_back({i, i + 1});
        return {k, edges};
    }
    if (name.rfind("cycle:", 0) == 0) {
        int k = parse_k("cycle:");
        if (k < 3) throw InputError("cycle graph needs >= 3 vertices");
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < k; ++i) edges.push_back({i, (i + 1) % k});
        return {k, edges};
    }
    if (name.rfind("complete:", 0) == 0) {
        int k = parse_k("complete:");
        if (k < 2) throw InputError("complete graph needs >= 2 vertices");
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) edges.push_back({i, j});
        return {k, edges};
    }
    throw InputError("unknown graph '" + name + "' (use triangle, path:k, cycle:k, complete:k)");
}

}  // namespace

Json gen_upper_triangular(int n) {
    if (n < 1) throw InputError("upper-triangular: n must be positive");
    // Element (j, i) = part j's copy on slot i, for i in [j, n).
    std::vector<std::vector<int>> slots(n), parts(n);
    int id = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) {
            parts[j].push_back(id);
            slots[i].push_back(id);
            ++id;
        }
    Json oracle;
    oracle["kind"] = "partition";
    oracle["n"] = id;
    oracle["parts"] = slots;
    oracle["capacities"] = std::vector<int>(n, 1);
    return sap_doc(id, std::move(oracle), std::vector<double>(id, 1.0),
                   std::vector<double>(id, 1.0), parts);
}

Json gen_adwords_laminar(int n_elements, int depth, double eps, uint64_t seed) {
    if (n_elements < 2) throw InputError("adwords-laminar: need at least 2 elements");
    if (depth < 1) throw InputError("adwords-laminar: depth must be >= 1");
    if (eps <= 0 || eps >= 1) throw InputError("adwords-laminar: eps must lie in (0,1)");
    SplitMix64 rng(seed);

    // Recursive random split of [0, n) to the requested depth. Budgets are
    // integers: leaves get roughly 60-90% of their bid mass, inner nodes
    // slightly less than the sum of their children so inner constraints can
    // bind too. Integer budgets keep every positive marginal of the cover
    // function at >= 1, so bids <= eps satisfy the small-bids assumption.
    Json sets = Json::array();
    std::vector<std::pair<std::vector<int>, double>> family;

    // Build the tree recursively; returns this subtree's total child budget.
    std::function<double(int, int, int)> build = [&](int lo, int hi, int level) -> double {
        std::vector<int> members(hi - lo);
        std::iota(members.begin(), members.end(), lo);
        double budget;
        if (level >= depth || hi - lo <= 2) {
            // Leaf budget: saturated by roughly 60-90% of its elements.
            double mass = (hi - lo) * eps * rng.uniform(0.6, 0.9);
            budget = std::max(1.0, std::floor(mass));
        } else {
            int cut = lo + 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(hi - lo - 1)));
            double child_sum = build(lo, cut, level + 1) + build(cut, hi, level + 1);
            budget = std::max(1.0, std::ceil(child_sum * rng.uniform(0.7, 0.95)));
        }
        family.push_back({std::move(members), budget});
        return budget;
    };
    build(0, n_elements, 0);

    for (auto& [members, budget] : family) {
        Json s;
        s["members"] = members;
        s["budget"] = budget;
        sets.push_back(std::move(s));
    }
    Json oracle;
    oracle["kind"] = "laminar";
    oracle["n"] = n_elements;
    oracle["sets"] = std::move(sets);

    std::vector<double> bids(n_elements);
    for (double& b : bids) b = rng.uniform(0.5 * eps, eps);

    // Random parts of size 1..4 over a random element order.
    std::vector<int> order(n_elements);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n_elements - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(static_cast<uint64_t>(i + 1))]);
    std::vector<std::vector<int>> parts;
    for (int i = 0; i < n_elements;) {
        int size = 1 + static_cast<int>(rng.next_below(4));
        size = std::min(size, n_elements - i);
        std::vector<int> part(order.begin() + i, order.begin() + i + size);
        std::sort(part.begin(), part.end());
        parts.push_back(std::move(part));
        i += size;
    }
    return sap_doc(n_elements, std::move(oracle), bids, bids, parts);
}

Json gen_adwords_triangular(int bidders, double budget) {
    if (bidders < 1) throw InputError("adwords-triangular: bidders must be positive");
    if (budget < 1) throw InputError("adwords-triangular: budget must be >= 1");
    // bidders parts; part j contains one unit bid on each bidder in [j, bidders).
    int id = 0;
    std::vector<std::vector<int>> per_bidder(bidders), parts(bidders);
    for (int j = 0; j < bidders; ++j)
        for (int i = j; i < bidders; ++i) {
            parts[j].push_back(id);
            per_bidder[i].push_back(id);
            ++id;
        }
    Json children = Json::array();
    for (int i = 0; i < bidders; ++i) {
        Json uni;
        uni["kind"] = "uniform";
        uni["n"] = static_cast<int>(per_bidder[i].size());
        uni["capacity"] = 1;
        Json sc;
        sc["kind"] = "scale";
        sc["factor"] = budget;
        sc["base"] = std::move(uni);
        children.push_back(std::move(sc));
    }
    // The direct sum concatenates children, so remap ids bidder-major.
    std::vector<int> remap(id);
    int pos = 0;
    for (int i = 0; i < bidders; ++i)
        for (int e : per_bidder[i]) remap[e] = pos++;
    std::vector<std::vector<int>> parts_remapped(bidders);
    for (int j = 0; j < bidders; ++j) {
        for (int e : parts[j]) parts_remapped[j].push_back(remap[e]);
        std::sort(parts_remapped[j].begin(), parts_remapped[j].end());
    }
    Json oracle;
    oracle["kind"] = "direct-sum";
    oracle["parts"] = std::move(children);
    return sap_doc(id, std::move(oracle), std::vector<double>(id, 1.0),
                   std::vector<double>(id, 1.0), parts_remapped);
}

Json gen_matroid_coloring(int n_vertices, const std::vector<std::pair<int, int>>& edges,
                          int delta) {
    if (delta < 1) throw InputError("matroid-coloring: delta must be positive");
    const int m = static_cast<int>(edges.size());
    if (m == 0) throw InputError("matroid-coloring: graph has no edges");
    Json edge_json = Json::array();
    for (auto [u, v] : edges) edge_json.push_back({u, v});

    Json children = Json::array();
    for (int c = 0; c < delta; ++c) {
        Json g;
        g["kind"] = "graphic";
        g["vertices"] = n_vertices;
        g["edges"] = edge_json;
        children.push_back(std::move(g));
    }
    Json oracle;
    if (delta == 1) {
        oracle = children[0];
    } else {
        oracle["kind"] = "direct-sum";
        oracle["parts"] = std::move(children);
    }
    int n = m * delta;
    std::vector<std::vector<int>> parts(m);
    for (int e = 0; e < m; ++e)
        for (int c = 0; c < delta; ++c) parts[e].push_back(c * m + e);
    return sap_doc(n, std::move(oracle), std::vector<double>(n, 1.0),
                   std::vector<double>(n, 1.0), parts);
}

Json gen_matroid_coloring(const std::string& graph, int delta) {
    auto [nv, edges] = named_graph(graph);
    return gen_matroid_coloring(nv, edges, delta);
}

Json gen_random_polymatroid(int n, uint64_t seed) {
    if (n < 1) throw InputError("random-polymatroid: n must be positive");
    SplitMix64 rng(seed);
    int n_points = std::max(2, n + static_cast<int>(rng.next_below(4)) - 1);
    std::vector<double> weights(n_points);
    for (double& w : weights) w = rng.uniform(0.25, 1.5);
    std::vector<std::vector<int>> covers(n);
    for (int e = 0; e < n; ++e) {
        int deg = 1 + static_cast<int>(rng.next_below(3));
        for (int d = 0; d < deg; ++d) {
            int p = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_points)));
            if (std::find(covers[e].begin(), covers[e].end(), p) == covers[e].end())
                covers[e].push_back(p);
        }
        std::sort(covers[e].begin(), covers[e].end());
    }
    Json oracle;
    oracle["kind"] = "coverage";
    oracle["points"] = weights;
    oracle["covers"] = covers;

    std::vector<double> values(n), costs(n);
    for (int e = 0; e < n; ++e) {
        values[e] = rng.uniform(0.5, 2.0);
        costs[e] = rng.uniform(0.5, 1.5);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(static_cast<uint64_t>(i + 1))]);
    std::vector<std::vector<int>> parts;
    for (int i = 0; i < n;) {
        int size = std::min<int>(1 + static_cast<int>(rng.next_below(3)), n - i);
        std::vector<int> part(order.begin() + i, order.begin() + i + size);
        std::sort(part.begin(), part.end());
        parts.push_back(std::move(part));
        i += size;
    }
    return sap_doc(n, std::move(oracle), values, costs, parts);
}

Json gen_oswm_random(int agents, int items, uint64_t seed) {
    if (agents < 1 || items < 1) throw InputError("oswm-random: need agents and items");
    SplitMix64 rng(seed);
    Json agents_json = Json::array();
    for (int i = 0; i < agents; ++i) {
        Json oracle;
        switch (rng.next_below(3)) {
            case 0: {
                oracle["kind"] = "uniform";
                oracle["n"] = items;
                oracle["capacity"] = 1 + static_cast<int>(rng.next_below(
                                             static_cast<uint64_t>(items)));
                break;
            }
            case 1: {
                // Partition of items into 2-3 groups with capacity 1 each.
                int groups = 2 + static_cast<int>(rng.next_below(2));
                groups = std::min(groups, items);
                std::vector<std::vector<int>> parts(groups);
                for (int j = 0; j < items; ++j)
                    parts[rng.next_below(static_cast<uint64_t>(groups))].push_back(j);
                // Remove empty groups.
                std::vector<std::vector<int>> nonempty;
                for (auto& p : parts)
                    if (!p.empty()) nonempty.push_back(std::move(p));
                oracle["kind"] = "partition";
                oracle["n"] = items;
                oracle["parts"] = nonempty;
                oracle["capacities"] = std::vector<int>(nonempty.size(), 1);
                break;
            }
            default: {
                // Graphic matroid on a small random multigraph.
                int nv = std::max(2, items / 2 + 1);
                Json edges = Json::array();
                for (int j = 0; j < items; ++j) {
                    int u = static_cast<int>(rng.next_below(static_cast<uint64_t>(nv)));
                    int v = static_cast<int>(rng.next_below(static_cast<uint64_t>(nv - 1)));
                    if (v >= u) ++v;
                    edges.push_back({u, v});
                }
                oracle["kind"] = "graphic";
                oracle["vertices"] = nv;
                oracle["edges"] = std::move(edges);
                break;
            }
        }
        Json agent;
        agent["oracle"] = std::move(oracle);
        agent["weight"] = 0.25 + 0.25 * static_cast<double>(rng.next_below(8));
        agents_json.push_back(std::move(agent));
    }
    Json doc;
    doc["agents"] = std::move(agents_json);
    doc["items"] = items;
    return doc;
}

Json gen_oswm_triangular(int n) {
    if (n < 1) throw InputError("oswm-triangular: n must be positive");
    // Agent i holds a rank-1 matroid over items {i, ..., n-1}; items outside
    // are loops (capacity-0 group).
    Json agents_json = Json::array();
    for (int i = 0; i < n; ++i) {
        std::vector<int> allowed, rest;
        for (int j = 0; j < n; ++j) (j >= i ? allowed : rest).push_back(j);
        Json oracle;
        oracle["kind"] = "partition";
        oracle["n"] = n;
        std::vector<std::vector<int>> parts{allowed};
        std::vector<int> caps{1};
        if (!rest.empty()) {
            parts.push_back(rest);
            caps.push_back(0);
        }
        oracle["parts"] = parts;
        oracle["capacities"] = caps;
        Json agent;
        agent["oracle"] = std::move(oracle);
        agent["weight"] = 1.0;
        agents_json.push_back(std::move(agent));
    }
    Json doc;
    doc["agents"] = std::move(agents_json);
    doc["items"] = n;
    return doc;
}

Json gen_instance(const std::string& family, int n, int depth, int delta, double eps,
                  const std::string& graph, uint64_t seed, double budget) {
    if (family == "upper-triangular") return gen_upper_triangular(n);
    if (family == "adwords-laminar") return gen_adwords_laminar(n, depth, eps, seed);
    if (family == "adwords-triangular") return gen_adwords_triangular(n, budget);
    if (family == "matroid-coloring") return gen_matroid_coloring(graph, delta);
    if (family == "random-polymatroid") return gen_random_polymatroid(n, seed);
    if (family == "oswm-random") return gen_oswm_random(n, delta > 0 ? delta : n, seed);
    if (family == "oswm-triangular") return gen_oswm_triangular(n);
    throw InputError("unknown generator family '" + family + "'");
}

}  // namespace polyflow
