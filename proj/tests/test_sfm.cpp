#include <cmath>

#include "doctest.h"
#include "polyflow/errors.hpp"
#include "polyflow/sfm.hpp"
#include "support/test_oracles.hpp"

using namespace polyflow;

namespace {

SfmResult run(const SubmodularOracle& f, double scale, const std::vector<double>& weights,
              SfmOptions::Backend backend, std::optional<int> force = std::nullopt) {
    SfmProblem prob;
    prob.f = &f;
    prob.live = ElementSet::full(f.ground_size());
    prob.scale = scale;
    prob.weights = &weights;
    prob.force_element = force;
    SfmOptions opts;
    opts.backend = backend;
    return sfm_min(prob, opts);
}

}  // namespace

TEST_CASE("sfm on fixed fixtures") {
    // g(S) = |S| - x(S) with x = (0.3, 0.7): the minimum is 0, attained only
    // by the empty set (exhaustive over the 4 subsets).
    auto modular = make_uniform_rank(2, 2);
    SfmResult r = run(*modular, 1.0, {0.3, 0.7}, SfmOptions::Backend::Exhaustive);
    CHECK(r.value == doctest::Approx(0.0));
    CHECK(r.maximal.empty());
    CHECK(r.minimal.empty());

    // scale = 0 minimizes -x(S): the maximal minimizer is the full support.
    r = run(*modular, 0.0, {0.3, 0.7}, SfmOptions::Backend::Exhaustive);
    CHECK(r.value == doctest::Approx(-1.0));
    CHECK(r.maximal == ElementSet::of(2, {0, 1}));

    // g(S) = 0.5*min(|S|,1) - x(S) with x = (0.3, 0.7): exhaustive over the 4
    // subsets gives g({b}) = -0.2 and g({a,b}) = 0.5 - 1.0 = -0.5, so the
    // unique minimizer is {a,b}.
    auto rank1 = make_uniform_rank(2, 1);
    r = run(*rank1, 0.5, {0.3, 0.7}, SfmOptions::Backend::Exhaustive);
    CHECK(r.value == doctest::Approx(-0.5));
    CHECK(r.minimal == ElementSet::of(2, {0, 1}));
    CHECK(r.maximal == ElementSet::of(2, {0, 1}));
}

TEST_CASE("sfm constrained to contain an element") {
    // min over S containing b of |S| - x(S).
    auto modular = make_uniform_rank(2, 2);
    SfmResult r =
        run(*modular, 1.0, {0.3, 0.7}, SfmOptions::Backend::Exhaustive, 1);
    CHECK(r.value == doctest::Approx(0.3));
    CHECK(r.minimal == ElementSet::of(2, {1}));
    CHECK(r.maximal == ElementSet::of(2, {1}));

    auto rank1 = make_uniform_rank(2, 1);
    SfmProblem bad;
    bad.f = rank1.get();
    bad.live = ElementSet::full(2);
    bad.contracted = ElementSet::of(2, {1});
    bad.force_element = 1;  // forced element inside T
    std::vector<double> w{0.0, 0.0};
    bad.weights = &w;
    CHECK_THROWS_AS(sfm_min(bad), InputError);
}

TEST_CASE("exhaustive and min-norm backends agree on random instances") {
    SplitMix64 rng(41);
    for (int it = 0; it < 80; ++it) {
        int n = 3 + static_cast<int>(rng.next_below(12));  // n <= 14
        auto f = testing::random_oracle(n, rng);
        auto x = testing::random_loads(n, rng, 1.5);
        double scale = rng.next_double() * 1.5;

        SfmResult ex = run(*f, scale, x, SfmOptions::Backend::Exhaustive);
        SfmResult mn = run(*f, scale, x, SfmOptions::Backend::MinNorm);
        INFO(f->kind(), " n=", n, " it=", it, " gap=", mn.gap);
        CHECK(std::abs(ex.value - mn.value) <= 1e-7 * std::max(1.0, std::abs(ex.value)));

        // The reported extreme minimizers must themselves be minimizers.
        auto value_of = [&](const ElementSet& s) {
            double v = scale * f->eval(s);
            s.for_each([&](int e) { v -= x[e]; });
            return v;
        };
        CHECK(value_of(mn.maximal) <= ex.value + 1e-7);
        CHECK(value_of(mn.minimal) <= ex.value + 1e-7);
        CHECK(value_of(ex.maximal) == doctest::Approx(ex.value).epsilon(1e-10));
        CHECK(value_of(ex.minimal) == doctest::Approx(ex.value).epsilon(1e-10));
        // Lattice extremes from the exhaustive backend bracket the min-norm ones.
        CHECK(ex.maximal.is_superset_of(mn.minimal));
    }
}

TEST_CASE("constrained backends agree as well") {
    SplitMix64 rng(43);
    for (int it = 0; it < 40; ++it) {
        int n = 3 + static_cast<int>(rng.next_below(10));
        auto f = testing::random_oracle(n, rng);
        auto x = testing::random_loads(n, rng, 1.2);
        int e = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        SfmResult ex = run(*f, 1.0, x, SfmOptions::Backend::Exhaustive, e);
        SfmResult mn = run(*f, 1.0, x, SfmOptions::Backend::MinNorm, e);
        CHECK(std::abs(ex.value - mn.value) <= 1e-7 * std::max(1.0, std::abs(ex.value)));
        CHECK(mn.minimal.contains(e));
        CHECK(mn.maximal.contains(e));
    }
}

TEST_CASE("block decomposition matches whole-ground-set enumeration") {
    // The independent oracle here is a plain loop over all 2^n subsets using
    // eval() only, with no block logic at all.
    SplitMix64 rng(47);
    for (int it = 0; it < 20; ++it) {
        auto a = testing::random_oracle(4, rng);
        auto b = testing::random_oracle(5, rng);
        auto sum = make_direct_sum({a, b});
        const int n = 9;
        auto x = testing::random_loads(n, rng, 1.5);

        auto value_of = [&](uint32_t mask) {
            ElementSet s(n);
            double v = 0;
            for (int e = 0; e < n; ++e)
                if (mask & (1u << e)) {
                    s.add(e);
                    v -= x[e];
                }
            return v + sum->eval(s);
        };
        double best = 0;
        for (uint32_t mask = 0; mask < (1u << n); ++mask) best = std::min(best, value_of(mask));
        ElementSet or_mask(n);
        for (uint32_t mask = 0; mask < (1u << n); ++mask)
            if (value_of(mask) <= best + 1e-10)
                for (int e = 0; e < n; ++e)
                    if (mask & (1u << e)) or_mask.add(e);

        SfmResult res = run(*sum, 1.0, x, SfmOptions::Backend::Auto);
        CHECK(res.value == doctest::Approx(best).epsilon(1e-9));
        CHECK(res.maximal == or_mask);
    }
}
