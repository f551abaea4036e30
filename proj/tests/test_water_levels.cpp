#include <cmath>

#include "doctest.h"
#include "polyflow/errors.hpp"
#include "polyflow/offline.hpp"
#include "polyflow/solvers.hpp"
#include "polyflow/water_levels.hpp"
#include "support/test_oracles.hpp"

using namespace polyflow;

namespace {

void check_decomposition_shape(const WaterLevelDecomposition& dec) {
    // Densities strictly decrease and the chain strictly nests.
    for (size_t l = 0; l + 1 < dec.densities.size(); ++l) {
        CHECK(dec.densities[l] > dec.densities[l + 1]);
        CHECK(dec.chain[l + 1].is_superset_of(dec.chain[l]));
        CHECK(dec.chain[l + 1].count() > dec.chain[l].count());
    }
    if (!dec.chain.empty()) CHECK(dec.chain.back() == dec.universe);
    // alpha telescopes back to the densities.
    for (size_t l = 0; l < dec.alpha.size(); ++l) {
        CHECK(dec.alpha[l] >= -1e-12);
        double acc = 0;
        for (size_t k = l; k < dec.alpha.size(); ++k) acc += dec.alpha[k];
        CHECK(acc == doctest::Approx(dec.densities[l]).epsilon(1e-9));
    }
}

}  // namespace

TEST_CASE("water levels on fixed fixtures") {
    // Modular |S|: levels equal the loads themselves.
    auto modular = make_uniform_rank(2, 2);
    WaterLevelDecomposition dec = water_levels_alg1(*modular, {0.3, 0.7});
    CHECK(dec.levels[0] == doctest::Approx(0.3));
    CHECK(dec.levels[1] == doctest::Approx(0.7));
    REQUIRE(dec.chain.size() == 2);
    CHECK(dec.chain[0] == ElementSet::of(2, {1}));
    CHECK(dec.chain[1] == ElementSet::of(2, {0, 1}));
    CHECK(dec.densities[0] == doctest::Approx(0.7));
    CHECK(dec.densities[1] == doctest::Approx(0.3));

    // Rank-1 uniform: the two loads pool into a single level.
    auto rank1 = make_uniform_rank(2, 1);
    dec = water_levels_alg1(*rank1, {0.3, 0.7});
    CHECK(dec.levels[0] == doctest::Approx(1.0));
    CHECK(dec.levels[1] == doctest::Approx(1.0));
    REQUIRE(dec.chain.size() == 1);
    CHECK(dec.chain[0] == ElementSet::of(2, {0, 1}));

    // Partition matroid {a,b},{c}: per-part fill fractions.
    auto part = make_partition_rank(3, {{0, 1}, {2}}, {1, 1});
    dec = water_levels_alg1(*part, {0.2, 0.3, 0.9});
    CHECK(dec.levels[0] == doctest::Approx(0.5));
    CHECK(dec.levels[1] == doctest::Approx(0.5));
    CHECK(dec.levels[2] == doctest::Approx(0.9));
    check_decomposition_shape(dec);
}

TEST_CASE("alg2 freezing matches alg1 on fixtures and edge cases") {
    auto modular = make_uniform_rank(2, 2);
    auto rank1 = make_uniform_rank(2, 1);
    auto part = make_partition_rank(3, {{0, 1}, {2}}, {1, 1});
    auto cap2 = make_uniform_rank(3, 2);

    std::vector<std::pair<const SubmodularOracle*, std::vector<double>>> cases = {
        {modular.get(), {0.3, 0.7}},
        {rank1.get(), {0.3, 0.7}},
        {part.get(), {0.2, 0.3, 0.9}},
        {cap2.get(), {1.0, 1.0, 0.0}},
    };
    for (auto& [f, x] : cases) {
        WaterLevelDecomposition d1 = water_levels_alg1(*f, x);
        WaterLevelDecomposition d2 = water_levels_alg2(*f, x);
        REQUIRE(d1.levels.size() == d2.levels.size());
        for (size_t e = 0; e < d1.levels.size(); ++e)
            CHECK(d1.levels[e] == doctest::Approx(d2.levels[e]).epsilon(1e-9));
        check_decomposition_shape(d2);
    }

    // min(|S|,2) with x = (1,1,0): the zero-load element stays at level 0.
    WaterLevelDecomposition d = water_levels_alg2(*cap2, {1.0, 1.0, 0.0});
    CHECK(d.levels[0] == doctest::Approx(1.0));
    CHECK(d.levels[1] == doctest::Approx(1.0));
    CHECK(d.levels[2] == doctest::Approx(0.0));

    // All-zero loads: no set ever saturates at a finite scale.
    d = water_levels_alg2(*part, {0.0, 0.0, 0.0});
    for (double w : d.levels) CHECK(w == doctest::Approx(0.0));
}

TEST_CASE("brute-force max-min water level on fixtures") {
    auto modular = make_uniform_rank(2, 2);
    BruteWaterLevel b = water_level_brute(*modular, {0.3, 0.7}, 0);
    CHECK(b.max_min == doctest::Approx(0.3));
    CHECK(b.min_max == doctest::Approx(0.3));

    // The naive one-sided construction max_{S∋a} x(S)/f(S) overshoots: it
    // pools the heavier coordinate and gives (x1+x2)/2 = 0.5.
    double naive = 0;
    {
        std::vector<double> x{0.3, 0.7};
        for (uint32_t mask = 1; mask < 4; ++mask) {
            if (!(mask & 1)) continue;
            ElementSet s(2);
            double xs = 0;
            for (int e = 0; e < 2; ++e)
                if (mask & (1u << e)) {
                    s.add(e);
                    xs += x[e];
                }
            naive = std::max(naive, xs / modular->eval(s));
        }
    }
    CHECK(naive == doctest::Approx(0.5));

    // Zero loads: level 0 regardless of the oracle.
    auto rank1 = make_uniform_rank(2, 1);
    b = water_level_brute(*rank1, {0.0, 0.0}, 1);
    CHECK(b.max_min == doctest::Approx(0.0));

    CHECK_THROWS_AS(water_level_brute(*make_uniform_rank(17, 3),
                                      std::vector<double>(17, 0.1), 0),
                    CapabilityError);
}

TEST_CASE("three-way agreement on random instances") {
    SplitMix64 rng(53);
    for (int it = 0; it < 40; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(9));  // n <= 10
        auto f = testing::random_oracle(n, rng);
        auto x = testing::random_loads(n, rng, 1.4);
        if ((it & 3) == 0) x[rng.next_below(static_cast<uint64_t>(n))] = 0.0;

        WaterLevelDecomposition d1 = water_levels_alg1(*f, x);
        WaterLevelDecomposition d2 = water_levels_alg2(*f, x);
        check_decomposition_shape(d1);
        check_decomposition_shape(d2);
        for (int e = 0; e < n; ++e) {
            CHECK(std::abs(d1.levels[e] - d2.levels[e]) <= 1e-7);
            BruteWaterLevel b = water_level_brute(*f, x, e);
            INFO(f->kind(), " n=", n, " e=", e);
            CHECK(std::abs(b.max_min - b.min_max) <= 1e-7);  // saddle point
            CHECK(std::abs(d1.levels[e] - b.max_min) <= 1e-7);
        }
    }
}

TEST_CASE("water level properties: monotonicity, duality, feasibility, locality") {
    SplitMix64 rng(59);
    for (int it = 0; it < 30; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(9));
        auto f = testing::random_oracle(n, rng);
        auto x = testing::random_loads(n, rng, 1.2);
        WaterLevelDecomposition dec = water_levels_alg1(*f, x);

        // Duality: L_f(w) = sum of loads.
        double mass = 0;
        for (double v : x) mass += v;
        CHECK(std::abs(eval_lovasz(*f, dec.levels) - mass) <= 1e-8 * std::max(1.0, mass));

        // Monotonicity under a random coordinate increase.
        int e = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        std::vector<double> y = x;
        y[e] += rng.next_double();
        WaterLevelDecomposition dec_y = water_levels_alg1(*f, y);
        for (int e2 = 0; e2 < n; ++e2) CHECK(dec_y.levels[e2] >= dec.levels[e2] - 1e-9);

        // Feasibility indication against the exhaustive membership check.
        FeasibilityWitness fw = brute_force_feasibility(*f, x);
        CHECK(fw.feasible == (dec.max_level() <= 1.0 + 1e-9));

        // Locality: a small perturbation of e2 leaves well-separated levels of
        // other elements unchanged.
        const double delta = 1e-4;
        int e2 = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        std::vector<double> z = x;
        z[e2] += delta;
        WaterLevelDecomposition dec_z = water_levels_alg1(*f, z);
        for (int e1 = 0; e1 < n; ++e1) {
            if (e1 == e2) continue;
            if (std::abs(dec.levels[e1] - dec.levels[e2]) > 10 * delta)
                CHECK(std::abs(dec_z.levels[e1] - dec.levels[e1]) <= 1e-9);
        }
    }
}

TEST_CASE("water level chain rule at generic points") {
    SplitMix64 rng(61);
    int done = 0;
    for (int it = 0; it < 120 && done < 25; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(7));
        auto f = testing::random_oracle(n, rng);
        auto x = testing::random_loads(n, rng);
        for (double& v : x) v += 0.05;
        WaterLevelDecomposition dec = water_levels_alg1(*f, x);
        int e = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        // Generic point: e's level is unique among all elements.
        bool unique = true;
        for (int o = 0; o < n; ++o)
            if (o != e && std::abs(dec.levels[o] - dec.levels[e]) < 1e-3) unique = false;
        if (!unique) continue;
        ++done;

        const double h = 1e-6;
        std::vector<double> y = x;
        y[e] += h;
        WaterLevelDecomposition dec_y = water_levels_alg1(*f, y);
        std::vector<double> gw(n), gw_y(n);
        for (int o = 0; o < n; ++o) {
            gw[o] = price_G(dec.levels[o]);
            gw_y[o] = price_G(dec_y.levels[o]);
        }
        double fd = (eval_lovasz(*f, gw_y) - eval_lovasz(*f, gw)) / h;
        CHECK(std::abs(fd - price_g(dec.levels[e])) <= 1e-4);
    }
    CHECK(done >= 25);
}

TEST_CASE("thresholded levels follow the bang-per-buck filter") {
    // Uniform ratios: single threshold entry equal to the plain water levels.
    auto part = make_partition_rank(3, {{0, 1}, {2}}, {1, 1});
    std::vector<double> x{0.2, 0.3, 0.9}, b{1, 1, 1}, v{2, 2, 2};
    ThresholdedLevels tl = thresholded_levels(*part, x, b, v);
    REQUIRE(tl.thresholds.size() == 2);  // ratio 2 and the t=0 entry
    CHECK(tl.thresholds[0] == doctest::Approx(2.0));
    CHECK(tl.thresholds[1] == doctest::Approx(0.0));
    WaterLevelDecomposition plain = water_levels_alg1(*part, x);
    for (int e = 0; e < 3; ++e) {
        CHECK(tl.decs[0].levels[e] == doctest::Approx(plain.levels[e]));
        CHECK(tl.decs[1].levels[e] == doctest::Approx(plain.levels[e]));
    }

    // Two ratio classes on a rank-1 matroid: at t=2 only the high-ratio
    // element remains (computed on the filtered support), at t=1 both count.
    auto rank1 = make_uniform_rank(2, 1);
    tl = thresholded_levels(*rank1, {0.5, 0.5}, {1, 1}, {2, 1});
    REQUIRE(tl.thresholds.size() == 3);
    CHECK(tl.decs[0].levels[0] == doctest::Approx(0.5));
    CHECK(tl.decs[0].levels[1] == doctest::Approx(0.0));
    CHECK(tl.decs[1].levels[0] == doctest::Approx(1.0));
    CHECK(tl.decs[1].levels[1] == doctest::Approx(1.0));
    CHECK(tl.level_at(1.5, 0) == doctest::Approx(0.5));
    CHECK(tl.level_at(3.0, 0) == doctest::Approx(0.0));
    CHECK(tl.level_at(0.7, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(thresholded_levels(*rank1, {0.5, 0.5}, {1, 0}, {2, 1}), InputError);
}

TEST_CASE("minimal tight set on fixtures") {
    auto rank1 = make_uniform_rank(2, 1);
    TightSetQuery q = minimal_tight_set(*rank1, {1.0, 0.0}, 0);
    REQUIRE(q.minimal_tight.has_value());
    CHECK(*q.minimal_tight == ElementSet::of(2, {0}));

    q = minimal_tight_set(*rank1, {0.5, 0.5}, 0);
    REQUIRE(q.minimal_tight.has_value());
    CHECK(*q.minimal_tight == ElementSet::of(2, {0, 1}));

    q = minimal_tight_set(*rank1, {0.2, 0.3}, 0);
    CHECK_FALSE(q.minimal_tight.has_value());
    CHECK(q.slack == doctest::Approx(0.5));
}

TEST_CASE("sua kkt audit") {
    auto part = make_partition_rank(3, {{0, 1}, {2}}, {1, 1});
    std::vector<double> x{0.2, 0.3, 0.9};
    WaterLevelDecomposition dec = water_levels_alg1(*part, x);
    CHECK(verify_sua_kkt(*part, x, dec).pass);

    // Injected fault: perturbing one alpha breaks stationarity.
    WaterLevelDecomposition broken = dec;
    broken.alpha[0] += 0.1;
    KktReport rep = verify_sua_kkt(*part, x, broken);
    CHECK_FALSE(rep.pass);

    // Zero loads: vacuous pass.
    std::vector<double> zero{0, 0, 0};
    WaterLevelDecomposition dz = water_levels_alg1(*part, zero);
    CHECK(verify_sua_kkt(*part, zero, dz).pass);
}

TEST_CASE("kkt audit passes on random decompositions") {
    SplitMix64 rng(67);
    for (int it = 0; it < 30; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(9));
        auto f = testing::random_oracle(n, rng);
        auto x = testing::random_loads(n, rng, 1.3);
        WaterLevelDecomposition dec = water_levels_alg1(*f, x);
        KktReport rep = verify_sua_kkt(*f, x, dec);
        INFO(f->kind(), " n=", n, " ",
             (rep.violations.empty() ? std::string() : rep.violations[0]));
        CHECK(rep.pass);
    }
}

TEST_CASE("lipschitz water levels under small bids") {
    // Laminar family with integer budgets: every positive marginal is >= 1,
    // so costs <= eps satisfy the small-bids assumption with parameter eps.
    const double eps = 0.1;
    SplitMix64 rng(71);
    for (int it = 0; it < 15; ++it) {
        int n = 4 + static_cast<int>(rng.next_below(7));
        LaminarBudgetSpec spec;
        spec.n = n;
        LaminarBudgetSpec::Entry root;
        for (int e = 0; e < n; ++e) root.members.push_back(e);
        root.budget = 1 + static_cast<double>(rng.next_below(3));
        spec.sets.push_back(root);
        int cut = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - 1)));
        LaminarBudgetSpec::Entry left, right;
        for (int e = 0; e < cut; ++e) left.members.push_back(e);
        for (int e = cut; e < n; ++e) right.members.push_back(e);
        left.budget = 1 + static_cast<double>(rng.next_below(2));
        right.budget = 1 + static_cast<double>(rng.next_below(2));
        spec.sets.push_back(left);
        spec.sets.push_back(right);
        auto f = make_laminar_budget(spec);

        std::vector<double> costs(n);
        for (double& c : costs) c = rng.uniform(0.5 * eps, eps);
        auto x = testing::random_loads(n, rng, 3.0);
        std::vector<double> bx(n);
        for (int e = 0; e < n; ++e) bx[e] = costs[e] * x[e];
        WaterLevelDecomposition before = water_levels_alg1(*f, bx);

        int e = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        double t = rng.next_double() * 2.0;
        std::vector<double> by = bx;
        by[e] += costs[e] * t;
        WaterLevelDecomposition after = water_levels_alg1(*f, by);
        for (int o = 0; o < n; ++o)
            CHECK(after.levels[o] - before.levels[o] <= eps * t + 1e-9);
    }
}

TEST_CASE("block fast path equals the monolithic route") {
    SplitMix64 rng(73);
    for (int it = 0; it < 20; ++it) {
        auto a = testing::random_oracle(4, rng);
        auto b = testing::random_oracle(4, rng);
        auto sum = make_direct_sum({a, b});
        auto x = testing::random_loads(8, rng, 1.2);
        WaterLevelOptions with_blocks, without_blocks;
        without_blocks.use_blocks = false;
        WaterLevelDecomposition d1 = water_levels_alg1(*sum, x, with_blocks);
        WaterLevelDecomposition d2 = water_levels_alg1(*sum, x, without_blocks);
        for (int e = 0; e < 8; ++e)
            CHECK(d1.levels[e] == doctest::Approx(d2.levels[e]).epsilon(1e-9));
        CHECK(d1.chain.size() == d2.chain.size());
    }
}
