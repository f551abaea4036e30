#include "polyflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "polyflow/errors.hpp"

namespace polyflow {

std::vector<ElementSet> SubmodularOracle::blocks() const {
    return {ElementSet::full(ground_size())};
}

double SubmodularOracle::marginal(const ElementSet& base, int e) const {
    ElementSet with = base;
    with.add(e);
    return eval(with) - eval(base);
}

namespace {

// Connected components of an arbitrary "touches" relation between elements,
// used to derive direct-sum blocks for graphic/transversal/coverage oracles.
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), size_(n, 1) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

std::vector<ElementSet> group_blocks(int n_elements, const std::vector<int>& component_of) {
    std::unordered_map<int, ElementSet> groups;
    for (int e = 0; e < n_elements; ++e) {
        auto it = groups.find(component_of[e]);
        if (it == groups.end())
            it = groups.emplace(component_of[e], ElementSet(n_elements)).first;
        it->second.add(e);
    }
    std::vector<ElementSet> out;
    out.reserve(groups.size());
    for (auto& [key, set] : groups) out.push_back(std::move(set));
    // Deterministic order: by smallest member.
    std::sort(out.begin(), out.end(), [](const ElementSet& a, const ElementSet& b) {
        int ma = -1, mb = -1;
        a.for_each([&](int e) { if (ma < 0) ma = e; });
        b.for_each([&](int e) { if (mb < 0) mb = e; });
        return ma < mb;
    });
    return out;
}

// ---------------------------------------------------------------------------

class UniformRank final : public SubmodularOracle {
public:
    UniformRank(int n, int cap, double scale) : n_(n), cap_(cap), scale_(scale) {
        if (n < 0 || cap < 0) throw InputError("uniform oracle: negative size or capacity");
        if (scale < 0) throw InputError("uniform oracle: negative scale");
    }
    int ground_size() const override { return n_; }
    double eval(const ElementSet& s) const override {
        return scale_ * std::min(s.count(), cap_);
    }
    std::string kind() const override { return "uniform"; }

    class Chain final : public ChainEvaluator {
    public:
        Chain(int cap, double scale) : cap_(cap), scale_(scale) {}
        double push(int) override {
            ++depth_;
            return depth_ <= cap_ ? scale_ : 0.0;
        }
        void pop() override { --depth_; }
        void clear() override { depth_ = 0; }
        double total() const override { return scale_ * std::min(depth_, cap_); }

    private:
        int cap_, depth_ = 0;
        double scale_;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(cap_, scale_);
    }

private:
    int n_, cap_;
    double scale_;
};

// ---------------------------------------------------------------------------

class PartitionRank final : public SubmodularOracle {
public:
    PartitionRank(int n, std::vector<std::vector<int>> parts, std::vector<int> caps)
        : n_(n), parts_(std::move(parts)), caps_(std::move(caps)), part_of_(n, -1) {
        if (parts_.size() != caps_.size())
            throw InputError("partition oracle: parts/capacities size mismatch");
        for (size_t p = 0; p < parts_.size(); ++p) {
            if (caps_[p] < 0) throw InputError("partition oracle: negative capacity");
            for (int e : parts_[p]) {
                if (e < 0 || e >= n) throw InputError("partition oracle: element id out of range");
                if (part_of_[e] != -1) throw InputError("partition oracle: parts overlap");
                part_of_[e] = static_cast<int>(p);
            }
        }
        for (int e = 0; e < n; ++e)
            if (part_of_[e] == -1) throw InputError("partition oracle: element in no part");
    }
    int ground_size() const override { return n_; }
    double eval(const ElementSet& s) const override {
        std::vector<int> cnt(parts_.size(), 0);
        s.for_each([&](int e) { ++cnt[part_of_[e]]; });
        double v = 0;
        for (size_t p = 0; p < parts_.size(); ++p) v += std::min(cnt[p], caps_[p]);
        return v;
    }
    std::string kind() const override { return "partition"; }
    std::vector<ElementSet> blocks() const override {
        std::vector<ElementSet> out;
        out.reserve(parts_.size());
        for (const auto& part : parts_) out.push_back(ElementSet::from(n_, part));
        return out;
    }

    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const PartitionRank& o) : o_(o), cnt_(o.parts_.size(), 0) {}
        double push(int e) override {
            int p = o_.part_of_[e];
            stack_.push_back(p);
            double m = cnt_[p] < o_.caps_[p] ? 1.0 : 0.0;
            ++cnt_[p];
            total_ += m;
            return m;
        }
        void pop() override {
            int p = stack_.back();
            stack_.pop_back();
            --cnt_[p];
            if (cnt_[p] < o_.caps_[p]) total_ -= 1.0;
        }
        void clear() override {
            for (int p : stack_) --cnt_[p];
            stack_.clear();
            total_ = 0;
        }
        double total() const override { return total_; }

    private:
        const PartitionRank& o_;
        std::vector<int> cnt_;
        std::vector<int> stack_;
        double total_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    friend class Chain;
    int n_;
    std::vector<std::vector<int>> parts_;
    std::vector<int> caps_;
    std::vector<int> part_of_;
};

// ---------------------------------------------------------------------------

class GraphicRank final : public SubmodularOracle {
public:
    GraphicRank(int n_vertices, std::vector<std::pair<int, int>> edges)
        : nv_(n_vertices), edges_(std::move(edges)) {
        for (auto [u, v] : edges_)
            if (u < 0 || v < 0 || u >= nv_ || v >= nv_)
                throw InputError("graphic oracle: vertex id out of range");
        UnionFind uf(nv_);
        for (auto [u, v] : edges_) uf.unite(u, v);
        component_of_.resize(edges_.size());
        for (size_t e = 0; e < edges_.size(); ++e) component_of_[e] = uf.find(edges_[e].first);
    }
    int ground_size() const override { return static_cast<int>(edges_.size()); }
    double eval(const ElementSet& s) const override {
        {
            std::lock_guard<std::mutex> lock(memo_mutex_);
            auto it = memo_.find(s);
            if (it != memo_.end()) return it->second;
        }
        auto ch = chain();
        double v = 0;
        s.for_each([&](int e) { v += ch->push(e); });
        {
            std::lock_guard<std::mutex> lock(memo_mutex_);
            if (memo_.size() > kMemoLimit) memo_.clear();
            memo_.emplace(s, v);
        }
        return v;
    }
    std::string kind() const override { return "graphic"; }
    std::vector<ElementSet> blocks() const override {
        return group_blocks(ground_size(), component_of_);
    }

    // Union-find with an undo log (union by size, path-halving disabled) and
    // epoch-stamped lazy reset so that clear() is O(1).
    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const GraphicRank& o)
            : o_(o), parent_(o.nv_), size_(o.nv_), stamp_(o.nv_, 0) {}
        double push(int e) override {
            auto [u, v] = o_.edges_[e];
            int ru = find(u), rv = find(v);
            if (ru == rv) {
                log_.push_back(-1);
                return 0.0;
            }
            if (size(ru) < size(rv)) std::swap(ru, rv);
            set_parent(rv, ru);
            size_[ru] += size_[rv];
            log_.push_back(rv);
            total_ += 1.0;
            return 1.0;
        }
        void pop() override {
            int rv = log_.back();
            log_.pop_back();
            if (rv < 0) return;
            int ru = parent_[rv];
            size_[ru] -= size_[rv];
            parent_[rv] = rv;
            total_ -= 1.0;
        }
        void clear() override {
            ++epoch_;
            log_.clear();
            total_ = 0;
        }
        double total() const override { return total_; }

    private:
        void touch(int v) {
            if (stamp_[v] != epoch_) {
                stamp_[v] = epoch_;
                parent_[v] = v;
                size_[v] = 1;
            }
        }
        int find(int v) {
            touch(v);
            while (parent_[v] != v) {
                v = parent_[v];
                touch(v);
            }
            return v;
        }
        int size(int v) {
            touch(v);
            return size_[v];
        }
        void set_parent(int child, int par) { parent_[child] = par; }

        const GraphicRank& o_;
        std::vector<int> parent_, size_;
        std::vector<uint32_t> stamp_;
        uint32_t epoch_ = 1;
        std::vector<int> log_;
        double total_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    static constexpr size_t kMemoLimit = 1 << 20;
    friend class Chain;
    int nv_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> component_of_;
    mutable std::unordered_map<ElementSet, double, ElementSetHash> memo_;
    mutable std::mutex memo_mutex_;
};

// ---------------------------------------------------------------------------

class TransversalRank final : public SubmodularOracle {
public:
    TransversalRank(int n_right, std::vector<std::vector<int>> adj)
        : nr_(n_right), adj_(std::move(adj)) {
        for (const auto& nbrs : adj_)
            for (int r : nbrs)
                if (r < 0 || r >= nr_)
                    throw InputError("transversal oracle: right vertex out of range");
        // Blocks: components of the bipartite incidence graph.
        int n = static_cast<int>(adj_.size());
        UnionFind uf(n + nr_);
        for (int e = 0; e < n; ++e)
            for (int r : adj_[e]) uf.unite(e, n + r);
        component_of_.resize(n);
        for (int e = 0; e < n; ++e) component_of_[e] = uf.find(e);
    }
    int ground_size() const override { return static_cast<int>(adj_.size()); }
    double eval(const ElementSet& s) const override {
        auto ch = chain();
        double v = 0;
        s.for_each([&](int e) { v += ch->push(e); });
        return v;
    }
    std::string kind() const override { return "transversal"; }
    std::vector<ElementSet> blocks() const override {
        return group_blocks(ground_size(), component_of_);
    }

    // Incremental Kuhn matching; a push attempts one augmenting path and the
    // undo log records matching flips so pop() restores the exact state.
    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const TransversalRank& o)
            : o_(o), match_right_(o.nr_, -1), visited_(o.nr_, 0) {}
        double push(int e) override {
            ++attempt_;
            size_t mark = flips_.size();
            bool ok = augment(e);
            log_.push_back({mark, ok});
            if (ok) total_ += 1.0;
            return ok ? 1.0 : 0.0;
        }
        void pop() override {
            auto [mark, ok] = log_.back();
            log_.pop_back();
            while (flips_.size() > mark) {
                auto [r, prev] = flips_.back();
                flips_.pop_back();
                match_right_[r] = prev;
            }
            if (ok) total_ -= 1.0;
        }
        void clear() override {
            std::fill(match_right_.begin(), match_right_.end(), -1);
            flips_.clear();
            log_.clear();
            total_ = 0;
        }
        double total() const override { return total_; }

    private:
        bool augment(int e) {
            for (int r : o_.adj_[e]) {
                if (visited_[r] == attempt_) continue;
                visited_[r] = attempt_;
                if (match_right_[r] == -1 || augment(match_right_[r])) {
                    flips_.push_back({r, match_right_[r]});
                    match_right_[r] = e;
                    return true;
                }
            }
            return false;
        }

        const TransversalRank& o_;
        std::vector<int> match_right_;
        std::vector<uint32_t> visited_;
        uint32_t attempt_ = 0;
        std::vector<std::pair<int, int>> flips_;
        std::vector<std::pair<size_t, bool>> log_;
        double total_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    friend class Chain;
    int nr_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> component_of_;
};

// ---------------------------------------------------------------------------

class LaminarBudget final : public SubmodularOracle {
public:
    explicit LaminarBudget(const LaminarBudgetSpec& spec) : n_(spec.n) {
        if (n_ < 0) throw InputError("laminar oracle: negative ground size");
        const size_t k = spec.sets.size();
        sets_.reserve(k);
        budgets_.reserve(k);
        for (const auto& entry : spec.sets) {
            if (entry.budget < 0) throw InputError("laminar oracle: negative budget");
            ElementSet s(n_);
            for (int e : entry.members) {
                if (e < 0 || e >= n_) throw InputError("laminar oracle: member out of range");
                s.add(e);
            }
            if (s.empty()) throw InputError("laminar oracle: empty family set");
            sets_.push_back(std::move(s));
            budgets_.push_back(entry.budget);
        }
        for (size_t i = 0; i < k; ++i)
            for (size_t j = i + 1; j < k; ++j) {
                const ElementSet& a = sets_[i];
                const ElementSet& b = sets_[j];
                if (a.intersects(b) && !a.is_superset_of(b) && !b.is_superset_of(a))
                    throw InputError("laminar oracle: family is not laminar");
            }
        // Forest: parent = smallest strict superset. Process by size ascending
        // so children precede parents in order_.
        order_.resize(k);
        for (size_t i = 0; i < k; ++i) order_[i] = static_cast<int>(i);
        std::sort(order_.begin(), order_.end(), [&](int a, int b) {
            int ca = sets_[a].count(), cb = sets_[b].count();
            return ca != cb ? ca < cb : a < b;
        });
        parent_.assign(k, -1);
        children_.assign(k, {});
        for (size_t oi = 0; oi < k; ++oi) {
            int i = order_[oi];
            int best = -1, best_count = n_ + 1;
            for (size_t j = 0; j < k; ++j) {
                if (static_cast<int>(j) == i) continue;
                if (sets_[j].is_superset_of(sets_[i]) && sets_[j] != sets_[i]) {
                    int c = sets_[j].count();
                    if (c < best_count) {
                        best_count = c;
                        best = static_cast<int>(j);
                    }
                }
            }
            parent_[i] = best;
            if (best >= 0) children_[best].push_back(i);
        }
        // Deepest containing set per element.
        deepest_.assign(n_, -1);
        for (int e = 0; e < n_; ++e) {
            int best = -1, best_count = n_ + 1;
            for (size_t i = 0; i < k; ++i)
                if (sets_[i].contains(e) && sets_[i].count() < best_count) {
                    best_count = sets_[i].count();
                    best = static_cast<int>(i);
                }
            if (best < 0)
                throw InputError("laminar oracle: element covered by no family set");
            deepest_[e] = best;
        }
        depth_.assign(k, 0);
        for (int i : reverse_topological()) depth_[i] = parent_[i] < 0 ? 0 : depth_[parent_[i]] + 1;
    }

    int ground_size() const override { return n_; }
    double eval(const ElementSet& s) const override {
        auto ch = chain();
        double v = 0;
        s.for_each([&](int e) { v += ch->push(e); });
        return v;
    }
    std::string kind() const override { return "laminar"; }
    std::vector<ElementSet> blocks() const override {
        std::vector<ElementSet> out;
        for (size_t i = 0; i < sets_.size(); ++i)
            if (parent_[i] < 0) out.push_back(sets_[i]);
        std::sort(out.begin(), out.end(), [](const ElementSet& a, const ElementSet& b) {
            int ma = -1, mb = -1;
            a.for_each([&](int e) { if (ma < 0) ma = e; });
            b.for_each([&](int e) { if (mb < 0) mb = e; });
            return ma < mb;
        });
        return out;
    }

    // DP state per node: number of stack elements whose deepest set is the
    // node, number of children with nonzero cover cost, and the cover cost of
    // the node's subtree. A push walks the leaf-to-root path; the node cost is
    // B if a direct element is present, else min(B, sum of child costs).
    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const LaminarBudget& o)
            : o_(o),
              direct_(o.sets_.size(), 0),
              child_sum_(o.sets_.size(), 0.0),
              cost_(o.sets_.size(), 0.0) {}
        double push(int e) override {
            Record rec;
            rec.node_path_start = path_log_.size();
            int node = o_.deepest_[e];
            ++direct_[node];
            rec.direct_node = node;
            double before = total_;
            walk_up(node);
            stack_.push_back(rec);
            return total_ - before;
        }
        void pop() override {
            Record rec = stack_.back();
            stack_.pop_back();
            --direct_[rec.direct_node];
            while (path_log_.size() > rec.node_path_start) {
                auto [node, old_cost, old_child_sum] = path_log_.back();
                path_log_.pop_back();
                if (o_.parent_[node] < 0)
                    total_ += old_cost - cost_[node];
                else
                    child_sum_[o_.parent_[node]] += old_cost - cost_[node];
                cost_[node] = old_cost;
                child_sum_[node] = old_child_sum;
            }
        }
        void clear() override {
            std::fill(direct_.begin(), direct_.end(), 0);
            std::fill(child_sum_.begin(), child_sum_.end(), 0.0);
            std::fill(cost_.begin(), cost_.end(), 0.0);
            stack_.clear();
            path_log_.clear();
            total_ = 0;
        }
        double total() const override { return total_; }

    private:
        void walk_up(int node) {
            while (node >= 0) {
                path_log_.push_back({node, cost_[node], child_sum_[node]});
                double fresh;
                if (direct_[node] > 0)
                    fresh = o_.budgets_[node];
                else if (child_sum_[node] > 0)
                    fresh = std::min(o_.budgets_[node], child_sum_[node]);
                else
                    fresh = 0.0;
                int par = o_.parent_[node];
                if (par < 0)
                    total_ += fresh - cost_[node];
                else
                    child_sum_[par] += fresh - cost_[node];
                cost_[node] = fresh;
                node = par;
            }
        }

        struct Record {
            size_t node_path_start;
            int direct_node;
        };
        const LaminarBudget& o_;
        std::vector<int> direct_;
        std::vector<double> child_sum_, cost_;
        std::vector<Record> stack_;
        std::vector<std::tuple<int, double, double>> path_log_;
        double total_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    std::vector<int> reverse_topological() const {
        // Sets sorted by size descending: parents before children.
        std::vector<int> idx(sets_.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            int ca = sets_[a].count(), cb = sets_[b].count();
            return ca != cb ? ca > cb : a < b;
        });
        return idx;
    }

    friend class Chain;
    int n_;
    std::vector<ElementSet> sets_;
    std::vector<double> budgets_;
    std::vector<int> order_, parent_, deepest_, depth_;
    std::vector<std::vector<int>> children_;
};

// ---------------------------------------------------------------------------

class Coverage final : public SubmodularOracle {
public:
    Coverage(std::vector<double> weights, std::vector<std::vector<int>> covers)
        : weights_(std::move(weights)), covers_(std::move(covers)) {
        for (double w : weights_)
            if (w < 0) throw InputError("coverage oracle: negative point weight");
        int np = static_cast<int>(weights_.size());
        for (const auto& c : covers_)
            for (int p : c)
                if (p < 0 || p >= np) throw InputError("coverage oracle: point id out of range");
        int n = static_cast<int>(covers_.size());
        UnionFind uf(n + np);
        for (int e = 0; e < n; ++e)
            for (int p : covers_[e]) uf.unite(e, n + p);
        component_of_.resize(n);
        for (int e = 0; e < n; ++e) component_of_[e] = uf.find(e);
    }
    int ground_size() const override { return static_cast<int>(covers_.size()); }
    double eval(const ElementSet& s) const override {
        auto ch = chain();
        double v = 0;
        s.for_each([&](int e) { v += ch->push(e); });
        return v;
    }
    std::string kind() const override { return "coverage"; }
    std::vector<ElementSet> blocks() const override {
        return group_blocks(ground_size(), component_of_);
    }

    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const Coverage& o) : o_(o), cnt_(o.weights_.size(), 0) {}
        double push(int e) override {
            double m = 0;
            for (int p : o_.covers_[e])
                if (cnt_[p]++ == 0) m += o_.weights_[p];
            stack_.push_back(e);
            total_ += m;
            return m;
        }
        void pop() override {
            int e = stack_.back();
            stack_.pop_back();
            for (int p : o_.covers_[e])
                if (--cnt_[p] == 0) total_ -= o_.weights_[p];
        }
        void clear() override {
            for (int e : stack_)
                for (int p : o_.covers_[e]) --cnt_[p];
            stack_.clear();
            total_ = 0;
        }
        double total() const override { return total_; }

    private:
        const Coverage& o_;
        std::vector<int> cnt_;
        std::vector<int> stack_;
        double total_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    friend class Chain;
    std::vector<double> weights_;
    std::vector<std::vector<int>> covers_;
    std::vector<int> component_of_;
};

// ---------------------------------------------------------------------------

class Table final : public SubmodularOracle {
public:
    Table(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
        if (n < 0 || n > 24) throw InputError("table oracle: n must be in [0, 24]");
        if (values_.size() != (size_t{1} << n))
            throw InputError("table oracle: need exactly 2^n values");
    }
    int ground_size() const override { return n_; }
    double eval(const ElementSet& s) const override {
        return values_[s.low_mask()];
    }
    std::string kind() const override { return "table"; }

    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const Table& o) : o_(o) {}
        double push(int e) override {
            uint64_t next = mask_ | (1ULL << e);
            double m = o_.values_[next] - o_.values_[mask_];
            stack_.push_back(mask_);
            mask_ = next;
            return m;
        }
        void pop() override {
            mask_ = stack_.back();
            stack_.pop_back();
        }
        void clear() override {
            mask_ = 0;
            stack_.clear();
        }
        double total() const override { return o_.values_[mask_]; }

    private:
        const Table& o_;
        uint64_t mask_ = 0;
        std::vector<uint64_t> stack_;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    friend class Chain;
    int n_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------

class Scaled final : public SubmodularOracle {
public:
    Scaled(OraclePtr base, double factor) : base_(std::move(base)), factor_(factor) {
        if (factor < 0) throw InputError("scale wrapper: negative factor");
    }
    int ground_size() const override { return base_->ground_size(); }
    double eval(const ElementSet& s) const override { return factor_ * base_->eval(s); }
    std::string kind() const override { return "scale"; }
    std::vector<ElementSet> blocks() const override { return base_->blocks(); }

    class Chain final : public ChainEvaluator {
    public:
        Chain(std::unique_ptr<ChainEvaluator> inner, double f)
            : inner_(std::move(inner)), f_(f) {}
        double push(int e) override { return f_ * inner_->push(e); }
        void pop() override { inner_->pop(); }
        void clear() override { inner_->clear(); }
        double total() const override { return f_ * inner_->total(); }

    private:
        std::unique_ptr<ChainEvaluator> inner_;
        double f_;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(base_->chain(), factor_);
    }

private:
    OraclePtr base_;
    double factor_;
};

// ---------------------------------------------------------------------------

class DirectSum final : public SubmodularOracle {
public:
    explicit DirectSum(std::vector<OraclePtr> children) : children_(std::move(children)) {
        offsets_.reserve(children_.size() + 1);
        offsets_.push_back(0);
        for (const auto& c : children_) offsets_.push_back(offsets_.back() + c->ground_size());
    }
    int ground_size() const override { return offsets_.back(); }
    double eval(const ElementSet& s) const override {
        double v = 0;
        for (size_t c = 0; c < children_.size(); ++c) {
            ElementSet local(children_[c]->ground_size());
            bool any = false;
            s.for_each([&](int e) {
                if (e >= offsets_[c] && e < offsets_[c + 1]) {
                    local.add(e - offsets_[c]);
                    any = true;
                }
            });
            if (any) v += children_[c]->eval(local);
        }
        return v;
    }
    std::string kind() const override { return "direct-sum"; }
    std::vector<ElementSet> blocks() const override {
        std::vector<ElementSet> out;
        for (size_t c = 0; c < children_.size(); ++c)
            for (const ElementSet& sub : children_[c]->blocks()) {
                ElementSet lifted(ground_size());
                sub.for_each([&](int e) { lifted.add(e + offsets_[c]); });
                if (!lifted.empty()) out.push_back(std::move(lifted));
            }
        return out;
    }

    class Chain final : public ChainEvaluator {
    public:
        explicit Chain(const DirectSum& o) : o_(o) {
            for (const auto& c : o.children_) inner_.push_back(c->chain());
        }
        double push(int e) override {
            size_t c = o_.child_of(e);
            stack_.push_back(c);
            double m = inner_[c]->push(e - o_.offsets_[c]);
            total_ += m;
            return m;
        }
        void pop() override {
            size_t c = stack_.back();
            stack_.pop_back();
            double before = inner_[c]->total();
            inner_[c]->pop();
            total_ += inner_[c]->total() - before;
        }
        void clear() override {
            for (auto& ch : inner_) ch->clear();
            stack_.clear();
            total_ = 0;
        }
        double total() const override { return total_; }

    private:
        const DirectSum& o_;
        std::vector<std::unique_ptr<ChainEvaluator>> inner_;
        std::vector<size_t> stack_;
        double total_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(*this);
    }

private:
    size_t child_of(int e) const {
        size_t lo = 0, hi = children_.size();
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (offsets_[mid] <= e)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    friend class Chain;
    std::vector<OraclePtr> children_;
    std::vector<int> offsets_;
};

// ---------------------------------------------------------------------------

class Contraction final : public SubmodularOracle {
public:
    Contraction(OraclePtr base, ElementSet t) : base_(std::move(base)), t_(std::move(t)) {
        f_t_ = base_->eval(t_);
    }
    int ground_size() const override { return base_->ground_size(); }
    double eval(const ElementSet& s) const override {
        return base_->eval(s | t_) - f_t_;
    }
    std::string kind() const override { return "contract"; }
    std::vector<ElementSet> blocks() const override { return base_->blocks(); }

    class Chain final : public ChainEvaluator {
    public:
        Chain(std::unique_ptr<ChainEvaluator> inner, const ElementSet& t)
            : inner_(std::move(inner)), t_(t) {
            seed();
        }
        double push(int e) override {
            if (t_.contains(e)) {
                skipped_.push_back(true);
                return 0.0;
            }
            skipped_.push_back(false);
            return inner_->push(e);
        }
        void pop() override {
            bool skip = skipped_.back();
            skipped_.pop_back();
            if (!skip) inner_->pop();
        }
        void clear() override {
            inner_->clear();
            skipped_.clear();
            seed();
        }
        double total() const override { return inner_->total() - base_value_; }

    private:
        void seed() {
            t_.for_each([&](int e) { inner_->push(e); });
            base_value_ = inner_->total();
        }
        std::unique_ptr<ChainEvaluator> inner_;
        ElementSet t_;
        std::vector<bool> skipped_;
        double base_value_ = 0;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(base_->chain(), t_);
    }

private:
    OraclePtr base_;
    ElementSet t_;
    double f_t_;
};

// ---------------------------------------------------------------------------

class Restriction final : public SubmodularOracle {
public:
    Restriction(OraclePtr base, ElementSet keep) : base_(std::move(base)), keep_(std::move(keep)) {}
    int ground_size() const override { return base_->ground_size(); }
    double eval(const ElementSet& s) const override { return base_->eval(s & keep_); }
    std::string kind() const override { return "restrict"; }
    std::vector<ElementSet> blocks() const override { return base_->blocks(); }

    class Chain final : public ChainEvaluator {
    public:
        Chain(std::unique_ptr<ChainEvaluator> inner, const ElementSet& keep)
            : inner_(std::move(inner)), keep_(keep) {}
        double push(int e) override {
            if (!keep_.contains(e)) {
                skipped_.push_back(true);
                return 0.0;
            }
            skipped_.push_back(false);
            return inner_->push(e);
        }
        void pop() override {
            bool skip = skipped_.back();
            skipped_.pop_back();
            if (!skip) inner_->pop();
        }
        void clear() override {
            inner_->clear();
            skipped_.clear();
        }
        double total() const override { return inner_->total(); }

    private:
        std::unique_ptr<ChainEvaluator> inner_;
        ElementSet keep_;
        std::vector<bool> skipped_;
    };
    std::unique_ptr<ChainEvaluator> chain() const override {
        return std::make_unique<Chain>(base_->chain(), keep_);
    }

private:
    OraclePtr base_;
    ElementSet keep_;
};

}  // namespace

OraclePtr make_uniform_rank(int n, int capacity, double scale) {
    return std::make_shared<UniformRank>(n, capacity, scale);
}
OraclePtr make_partition_rank(int n, std::vector<std::vector<int>> parts,
                              std::vector<int> capacities) {
    return std::make_shared<PartitionRank>(n, std::move(parts), std::move(capacities));
}
OraclePtr make_graphic_rank(int n_vertices, std::vector<std::pair<int, int>> edges) {
    return std::make_shared<GraphicRank>(n_vertices, std::move(edges));
}
OraclePtr make_transversal_rank(int n_right, std::vector<std::vector<int>> adjacency) {
    return std::make_shared<TransversalRank>(n_right, std::move(adjacency));
}
OraclePtr make_laminar_budget(const LaminarBudgetSpec& spec) {
    return std::make_shared<LaminarBudget>(spec);
}
OraclePtr make_coverage(std::vector<double> point_weights,
                        std::vector<std::vector<int>> covers) {
    return std::make_shared<Coverage>(std::move(point_weights), std::move(covers));
}
OraclePtr make_table(int n, std::vector<double> values) {
    return std::make_shared<Table>(n, std::move(values));
}
OraclePtr make_scaled(OraclePtr base, double factor) {
    return std::make_shared<Scaled>(std::move(base), factor);
}
OraclePtr make_direct_sum(std::vector<OraclePtr> children) {
    return std::make_shared<DirectSum>(std::move(children));
}
OraclePtr make_contraction(OraclePtr base, ElementSet contracted) {
    return std::make_shared<Contraction>(std::move(base), std::move(contracted));
}
OraclePtr make_restriction(OraclePtr base, ElementSet keep) {
    return std::make_shared<Restriction>(std::move(base), std::move(keep));
}

double laminar_budget_eval(const LaminarBudgetSpec& spec, const ElementSet& s) {
    LaminarBudget oracle(spec);
    if (s.universe_size() != spec.n) throw InputError("laminar eval: wrong universe size");
    return oracle.eval(s);
}

// ---------------------------------------------------------------------------

namespace {

// Fill values[mask] = f(set(mask)) for all subsets of `elems` via chain DFS.
void fill_table(ChainEvaluator& ch, const std::vector<int>& elems, size_t pos, uint32_t mask,
                double value, std::vector<double>& out) {
    if (pos == elems.size()) {
        out[mask] = value;
        return;
    }
    fill_table(ch, elems, pos + 1, mask, value, out);
    double m = ch.push(elems[pos]);
    fill_table(ch, elems, pos + 1, mask | (1u << pos), value + m, out);
    ch.pop();
}

}  // namespace

SubmodularityReport verify_submodular(const SubmodularOracle& f, bool exhaustive, int samples,
                                      uint64_t seed) {
    SubmodularityReport report;
    const int n = f.ground_size();
    auto fail = [&](std::string msg, ElementSet a, ElementSet b) {
        report.pass = false;
        report.detail = std::move(msg);
        report.witness_a = std::move(a);
        report.witness_b = std::move(b);
        return report;
    };

    double f_empty = f.eval(ElementSet(n));
    if (std::abs(f_empty) > 1e-12)
        return fail("f(empty) != 0", ElementSet(n), ElementSet(n));

    if (exhaustive) {
        if (n > 20) throw CapabilityError("verify_submodular: exhaustive mode requires n <= 20");
        std::vector<int> elems(n);
        for (int i = 0; i < n; ++i) elems[i] = i;
        std::vector<double> table(size_t{1} << n);
        auto ch = f.chain();
        fill_table(*ch, elems, 0, 0, 0.0, table);

        auto set_of = [&](uint32_t mask) {
            ElementSet s(n);
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) s.add(i);
            return s;
        };
        const uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
        for (uint32_t mask = 0; mask <= full && n > 0; ++mask) {
            double base = table[mask];
            double tol = 1e-9 * std::max(1.0, std::abs(base));
            for (int i = 0; i < n; ++i) {
                if (mask & (1u << i)) continue;
                double fi = table[mask | (1u << i)];
                if (fi < base - tol)
                    return fail("monotonicity violated", set_of(mask), set_of(mask | (1u << i)));
                for (int j = i + 1; j < n; ++j) {
                    if (mask & (1u << j)) continue;
                    double fj = table[mask | (1u << j)];
                    double fij = table[mask | (1u << i) | (1u << j)];
                    double tol2 = 1e-9 * std::max({1.0, std::abs(fi), std::abs(fj)});
                    if (fi + fj < fij + base - tol2)
                        return fail("submodularity violated", set_of(mask | (1u << i)),
                                    set_of(mask | (1u << j)));
                }
            }
            if (mask == full) break;
        }
        report.detail = "exhaustive check passed";
        return report;
    }

    SplitMix64 rng(seed);
    auto random_set = [&] {
        ElementSet s(n);
        for (int e = 0; e < n; ++e)
            if (rng.next_u64() & 1) s.add(e);
        return s;
    };
    for (int it = 0; it < samples; ++it) {
        ElementSet a = random_set(), b = random_set();
        double fa = f.eval(a), fb = f.eval(b);
        double fu = f.eval(a | b), fi = f.eval(a & b);
        double tol = 1e-9 * std::max({1.0, std::abs(fa), std::abs(fb)});
        if (fa + fb < fu + fi - tol) return fail("submodularity violated (sampled)", a, b);
        ElementSet sup = a | b;
        if (f.eval(sup) < fa - tol) return fail("monotonicity violated (sampled)", a, sup);
    }
    report.detail = "sampled check passed";
    return report;
}

double eval_lovasz(const SubmodularOracle& f, const std::vector<double>& w) {
    const int n = f.ground_size();
    if (static_cast<int>(w.size()) != n)
        throw InputError("eval_lovasz: weight vector size mismatch");
    std::vector<int> idx;
    idx.reserve(w.size());
    for (int e = 0; e < n; ++e) {
        if (w[e] < 0 || !std::isfinite(w[e]))
            throw InputError("eval_lovasz: weights must be finite and nonnegative");
        if (w[e] > 0) idx.push_back(e);
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return w[a] != w[b] ? w[a] > w[b] : a < b;
    });
    auto ch = f.chain();
    double total = 0, level_value = 0;
    size_t i = 0;
    while (i < idx.size()) {
        double tau = w[idx[i]];
        while (i < idx.size() && w[idx[i]] == tau) {
            level_value += ch->push(idx[i]);
            ++i;
        }
        double next_tau = i < idx.size() ? w[idx[i]] : 0.0;
        total += (tau - next_tau) * level_value;
    }
    return total;
}

}  // namespace polyflow
