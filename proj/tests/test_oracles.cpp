#include <cmath>

#include "doctest.h"
#include "polyflow/errors.hpp"
#include "polyflow/oracles.hpp"
#include "support/test_oracles.hpp"

using namespace polyflow;

namespace {

// Independent min-cover oracle: enumerate all subfamilies of the laminar
// family and take the cheapest one covering S.
double cover_by_enumeration(const LaminarBudgetSpec& spec, const ElementSet& s) {
    const size_t k = spec.sets.size();
    double best = std::numeric_limits<double>::infinity();
    for (uint64_t mask = 0; mask < (1ULL << k); ++mask) {
        ElementSet covered(spec.n);
        double cost = 0;
        for (size_t i = 0; i < k; ++i)
            if (mask & (1ULL << i)) {
                for (int e : spec.sets[i].members) covered.add(e);
                cost += spec.sets[i].budget;
            }
        if (covered.is_superset_of(s)) best = std::min(best, cost);
    }
    return best;
}

LaminarBudgetSpec appendix_family() {
    LaminarBudgetSpec spec;
    spec.n = 2;
    spec.sets = {{{0}, 1.0}, {{1}, 1.0}, {{0, 1}, 1.5}};
    return spec;
}

}  // namespace

TEST_CASE("lovasz extension on fixed fixtures") {
    // Rank-1 uniform matroid: the extension is max(w).
    auto rank1 = make_uniform_rank(2, 1);
    CHECK(eval_lovasz(*rank1, {0.5, 0.9}) == doctest::Approx(0.9).epsilon(1e-12));

    // Modular |S|: the extension is the coordinate sum.
    auto modular = make_uniform_rank(2, 2);
    CHECK(eval_lovasz(*modular, {0.3, 0.7}) == doctest::Approx(1.0).epsilon(1e-12));

    // Partition matroid with parts {a,b},{c}: hand-enumerated level sets give
    // (0.9-0.5)*f({c}) + 0.5*f({a,b,c}) = 0.4 + 1.0.
    auto part = make_partition_rank(3, {{0, 1}, {2}}, {1, 1});
    CHECK(eval_lovasz(*part, {0.5, 0.5, 0.9}) == doctest::Approx(1.4).epsilon(1e-12));

    CHECK_THROWS_AS(eval_lovasz(*part, {0.5, -0.1, 0.9}), InputError);
}

TEST_CASE("lovasz extension is positively homogeneous and convex") {
    SplitMix64 rng(11);
    for (int it = 0; it < 40; ++it) {
        int n = 3 + static_cast<int>(rng.next_below(6));
        auto f = testing::random_oracle(n, rng);
        auto w = testing::random_loads(n, rng);
        double lam = rng.next_double() * 3.0;
        std::vector<double> scaled(w);
        for (double& v : scaled) v *= lam;
        double lhs = eval_lovasz(*f, scaled);
        double rhs = lam * eval_lovasz(*f, w);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));

        auto u = testing::random_loads(n, rng);
        std::vector<double> mid(n);
        for (int e = 0; e < n; ++e) mid[e] = 0.5 * (w[e] + u[e]);
        CHECK(eval_lovasz(*f, mid) <=
              0.5 * eval_lovasz(*f, w) + 0.5 * eval_lovasz(*f, u) + 1e-9);
    }
}

TEST_CASE("lovasz extension of an indicator recovers the set value") {
    SplitMix64 rng(12);
    for (int it = 0; it < 25; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(8));
        auto f = testing::random_oracle(n, rng);
        ElementSet s(n);
        std::vector<double> ind(n, 0.0);
        for (int e = 0; e < n; ++e)
            if (rng.next_u64() & 1) {
                s.add(e);
                ind[e] = 1.0;
            }
        CHECK(eval_lovasz(*f, ind) == doctest::Approx(f->eval(s)).epsilon(1e-12));
    }
}

TEST_CASE("lovasz extension agrees with exact rational evaluation on tables") {
    // Table values and weights with denominator 8 so everything is exact.
    SplitMix64 rng(13);
    for (int it = 0; it < 10; ++it) {
        const int n = 4;
        std::vector<testing::Rational> table(1 << n, {0, 1});
        // Coverage-style construction keeps the table submodular.
        std::vector<uint32_t> covers(n);
        std::vector<long long> weights(5);
        for (auto& w : weights) w = 1 + static_cast<long long>(rng.next_below(8));
        for (int e = 0; e < n; ++e) covers[e] = 1 + (rng.next_u64() & 0x1f);
        for (uint32_t mask = 1; mask < (1u << n); ++mask) {
            uint32_t pts = 0;
            for (int e = 0; e < n; ++e)
                if (mask & (1u << e)) pts |= covers[e];
            long long total = 0;
            for (int p = 0; p < 5; ++p)
                if (pts & (1u << p)) total += weights[p];
            table[mask] = {total, 1};
        }
        std::vector<double> dbl(table.size());
        for (size_t i = 0; i < table.size(); ++i) dbl[i] = table[i].to_double();
        auto oracle = make_table(n, dbl);

        std::vector<testing::Rational> w(n);
        std::vector<double> wd(n);
        for (int e = 0; e < n; ++e) {
            w[e] = {static_cast<long long>(rng.next_below(9)), 8};
            wd[e] = w[e].to_double();
        }
        double exact = testing::lovasz_exact(n, table, w).to_double();
        CHECK(eval_lovasz(*oracle, wd) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("laminar budget evaluation matches the subfamily enumeration oracle") {
    LaminarBudgetSpec spec = appendix_family();
    CHECK(laminar_budget_eval(spec, ElementSet::of(2, {0})) == doctest::Approx(1.0));
    CHECK(laminar_budget_eval(spec, ElementSet::of(2, {0, 1})) == doctest::Approx(1.5));
    CHECK(laminar_budget_eval(spec, ElementSet(2)) == doctest::Approx(0.0));

    SplitMix64 rng(17);
    for (int it = 0; it < 60; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(7));
        LaminarBudgetSpec random;
        random.n = n;
        std::vector<std::pair<int, int>> ranges{{0, n}};
        while (!ranges.empty() && random.sets.size() < 12) {
            auto [lo, hi] = ranges.back();
            ranges.pop_back();
            LaminarBudgetSpec::Entry entry;
            for (int e = lo; e < hi; ++e) entry.members.push_back(e);
            entry.budget = 0.25 + rng.next_double() * 2;
            random.sets.push_back(entry);
            if (hi - lo >= 2 && (rng.next_u64() & 3) != 0) {
                int cut =
                    lo + 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(hi - lo - 1)));
                ranges.push_back({lo, cut});
                ranges.push_back({cut, hi});
            }
        }
        auto oracle = make_laminar_budget(random);
        for (int trial = 0; trial < 12; ++trial) {
            ElementSet s(n);
            for (int e = 0; e < n; ++e)
                if (rng.next_u64() & 1) s.add(e);
            double expected = cover_by_enumeration(random, s);
            CHECK(oracle->eval(s) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("laminar validation errors") {
    LaminarBudgetSpec crossing;
    crossing.n = 3;
    crossing.sets = {{{0, 1}, 1.0}, {{1, 2}, 1.0}};
    CHECK_THROWS_AS(make_laminar_budget(crossing), InputError);

    LaminarBudgetSpec uncovered;
    uncovered.n = 3;
    uncovered.sets = {{{0, 1}, 1.0}};
    CHECK_THROWS_AS(make_laminar_budget(uncovered), InputError);
}

TEST_CASE("verify_submodular accepts matroid ranks and flags violations") {
    auto triangle = make_graphic_rank(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(verify_submodular(*triangle, true).pass);

    // f({a})=1, f({b})=1, f({a,b})=3 is superadditive.
    auto bad = make_table(2, {0.0, 1.0, 1.0, 3.0});
    SubmodularityReport rep = verify_submodular(*bad, true);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.witness_a.has_value());
    CHECK(((rep.witness_a->count() == 1 && rep.witness_b->count() == 1)));

    auto laminar = make_laminar_budget(appendix_family());
    CHECK(verify_submodular(*laminar, true).pass);
}

TEST_CASE("every shipped oracle family passes the exhaustive submodularity check") {
    SplitMix64 rng(23);
    for (int it = 0; it < 60; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(11));  // n <= 12
        auto f = testing::random_oracle(n, rng);
        SubmodularityReport rep = verify_submodular(*f, true);
        INFO(f->kind(), " n=", n, " detail=", rep.detail);
        CHECK(rep.pass);
        CHECK(f->eval(ElementSet(n)) == doctest::Approx(0.0));
    }
}

TEST_CASE("chain evaluators match eval under push/pop sequences") {
    SplitMix64 rng(29);
    for (int it = 0; it < 40; ++it) {
        int n = 3 + static_cast<int>(rng.next_below(8));
        auto f = testing::random_oracle(n, rng);
        auto ch = f->chain();
        ElementSet current(n);
        std::vector<int> stack;
        for (int op = 0; op < 60; ++op) {
            if (!stack.empty() && (rng.next_u64() & 3) == 0) {
                current.remove(stack.back());
                stack.pop_back();
                ch->pop();
            } else {
                int e = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
                if (current.contains(e)) continue;
                double before = ch->total();
                double marg = ch->push(e);
                current.add(e);
                stack.push_back(e);
                CHECK(before + marg == doctest::Approx(ch->total()).epsilon(1e-9));
            }
            CHECK(ch->total() == doctest::Approx(f->eval(current)).epsilon(1e-9));
        }
    }
}

TEST_CASE("wrappers: scale, direct sum, contraction, restriction") {
    auto base = make_partition_rank(4, {{0, 1}, {2, 3}}, {1, 2});

    auto scaled = make_scaled(base, 2.5);
    CHECK(scaled->eval(ElementSet::of(4, {0, 2, 3})) == doctest::Approx(2.5 * 3.0));

    auto sum = make_direct_sum({make_uniform_rank(2, 1), make_uniform_rank(2, 2)});
    CHECK(sum->ground_size() == 4);
    CHECK(sum->eval(ElementSet::of(4, {0, 1, 2, 3})) == doctest::Approx(3.0));
    CHECK(sum->blocks().size() == 2);

    ElementSet t = ElementSet::of(4, {0});
    auto contracted = make_contraction(base, t);
    CHECK(contracted->eval(ElementSet(4)) == doctest::Approx(0.0));
    CHECK(contracted->eval(ElementSet::of(4, {1})) == doctest::Approx(0.0));
    CHECK(contracted->eval(ElementSet::of(4, {2})) == doctest::Approx(1.0));
    CHECK(verify_submodular(*contracted, true).pass);

    auto restricted = make_restriction(base, ElementSet::of(4, {0, 2}));
    CHECK(restricted->eval(ElementSet::of(4, {1, 2})) == doctest::Approx(1.0));
    CHECK(verify_submodular(*restricted, true).pass);
}

TEST_CASE("transversal rank is a maximum bipartite matching") {
    // Elements 0,1,2 all compete for right vertex 0; element 2 also reaches 1.
    auto f = make_transversal_rank(2, {{0}, {0}, {0, 1}});
    CHECK(f->eval(ElementSet::of(3, {0})) == doctest::Approx(1.0));
    CHECK(f->eval(ElementSet::of(3, {0, 1})) == doctest::Approx(1.0));
    CHECK(f->eval(ElementSet::of(3, {0, 2})) == doctest::Approx(2.0));
    CHECK(f->eval(ElementSet::of(3, {0, 1, 2})) == doctest::Approx(2.0));
    CHECK(verify_submodular(*f, true).pass);
}

TEST_CASE("graphic rank counts spanning forest edges") {
    auto f = make_graphic_rank(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}});
    CHECK(f->eval(ElementSet::of(4, {0, 1, 2})) == doctest::Approx(2.0));  // triangle
    CHECK(f->eval(ElementSet::full(4)) == doctest::Approx(3.0));
    CHECK(f->blocks().size() == 1);
}
