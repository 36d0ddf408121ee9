#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>

#include "support/oracles.hpp"
#include "support/test_util.hpp"
#include "tabsynth/nsga2.hpp"
#include "tabsynth/rng.hpp"

using namespace tabsynth;
using namespace tsupport;

namespace {

std::vector<ObjectiveVector> random_pop(std::size_t n, RngStream& rng, int grid = 0) {
    std::vector<ObjectiveVector> pop(n);
    for (auto& p : pop) {
        if (grid > 0) {
            // Coarse grid provokes ties and duplicates.
            p.f1 = static_cast<double>(rng.index(grid));
            p.f2 = static_cast<double>(rng.index(grid));
        } else {
            p.f1 = rng.uniform();
            p.f2 = rng.uniform();
        }
    }
    return pop;
}

}  // namespace

TEST_CASE("dominance truth table") {
    CHECK(dominates({0.1, -0.6}, {0.2, -0.5}));
    CHECK_FALSE(dominates({0.1, -0.5}, {0.2, -0.6}));  // incomparable
    CHECK_FALSE(dominates({0.2, -0.6}, {0.1, -0.5}));
    CHECK_FALSE(dominates({0.3, 0.4}, {0.3, 0.4}));  // never reflexive
    CHECK(dominates({0.3, 0.3}, {0.3, 0.4}));        // equal in one, better in one
}

TEST_CASE("clip_risk") {
    CHECK(clip_risk(-0.3, 0.0) == 0.0);
    CHECK(clip_risk(0.2, 0.0) == 0.2);
    CHECK(clip_risk(-0.05, -0.1) == -0.05);
    CHECK(objectives_of(0.6, -0.3).f1 == 0.0);
    CHECK(objectives_of(0.6, -0.3).f2 == -0.6);
}

TEST_CASE("sorting edge cases: empty, singleton, strict chain") {
    CHECK(non_dominated_sort({}).fronts.empty());

    const std::vector<ObjectiveVector> one = {{0.3, 0.4}};
    const auto r1 = non_dominated_sort(one);
    REQUIRE(r1.fronts.size() == 1);
    CHECK(r1.fronts[0] == std::vector<std::size_t>{0});
    CHECK(r1.rank[0] == 1);

    std::vector<ObjectiveVector> chain;
    for (int i = 0; i < 6; ++i) chain.push_back({static_cast<double>(i), static_cast<double>(i)});
    const auto rc = non_dominated_sort(chain);
    REQUIRE(rc.fronts.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(rc.fronts[i] == std::vector<std::size_t>{i});
        CHECK(rc.rank[i] == static_cast<int>(i) + 1);
    }
}

TEST_CASE("random populations match the pairwise brute-force oracle") {
    RngStream rng(2024);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + rng.index(20);
        const auto pop = random_pop(n, rng, rep % 3 == 0 ? 4 : 0);
        const auto got = non_dominated_sort(pop);
        const auto expect = oracle::fronts_bf(pop);
        REQUIRE(got.fronts.size() == expect.size());
        for (std::size_t f = 0; f < expect.size(); ++f) {
            auto a = got.fronts[f];
            auto b = expect[f];
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }
}

TEST_CASE("fronts partition the population and never dominate backwards") {
    RngStream rng(55);
    const auto pop = random_pop(40, rng);
    const auto res = non_dominated_sort(pop);
    std::vector<int> seen(pop.size(), 0);
    for (const auto& front : res.fronts)
        for (std::size_t i : front) ++seen[i];
    for (int s : seen) CHECK(s == 1);
    for (std::size_t fa = 0; fa < res.fronts.size(); ++fa)
        for (std::size_t fb = 0; fb <= fa; ++fb)
            for (std::size_t i : res.fronts[fa])
                for (std::size_t j : res.fronts[fb]) CHECK_FALSE(dominates(pop[i], pop[j]));
}

TEST_CASE("crowding: boundaries infinite, hand case equals 2, degenerate objective") {
    constexpr double inf = std::numeric_limits<double>::infinity();
    CHECK(crowding_distance(std::vector<ObjectiveVector>{{1, 2}}) == std::vector<double>{inf});
    CHECK(crowding_distance(std::vector<ObjectiveVector>{{1, 2}, {0, 3}}) ==
          std::vector<double>(2, inf));

    // Middle of three evenly spread points: (1-0)/(1-0) + (1-0)/(1-0) = 2.
    const std::vector<ObjectiveVector> three = {{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}};
    const auto d = crowding_distance(three);
    CHECK(d[0] == inf);
    CHECK(d[2] == inf);
    CHECK(d[1] == doctest::Approx(2.0).epsilon(1e-12));

    // Identical second objective: spacing from f1 only.
    const std::vector<ObjectiveVector> degen = {{0.0, 1.0}, {0.2, 1.0}, {1.0, 1.0}};
    const auto dd = crowding_distance(degen);
    CHECK(dd[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("crowding matches direct evaluation on random fronts") {
    RngStream rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        const auto pop = random_pop(2 + rng.index(15), rng, rep % 4 == 0 ? 3 : 0);
        // Use only the first non-dominated front as a realistic input.
        const auto fronts = non_dominated_sort(pop);
        std::vector<ObjectiveVector> front;
        for (std::size_t i : fronts.fronts[0]) front.push_back(pop[i]);
        const auto got = crowding_distance(front);
        const auto expect = oracle::crowding_bf(front);
        REQUIRE(got.size() == expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (std::isinf(expect[i]))
                CHECK(std::isinf(got[i]));
            else
                CHECK(within(got[i], expect[i], 1e-9));
        }
    }
}

TEST_CASE("selection: parents dominating all children survive (elitism)") {
    std::vector<ObjectiveVector> pool = {
        {0.1, -0.9}, {0.2, -0.8}, {0.15, -0.85}, {0.05, -0.95},  // parents
        {0.5, -0.4}, {0.6, -0.3}, {0.7, -0.2},   {0.8, -0.1},    // dominated children
    };
    const auto sel = select_survivors(pool, 4);
    std::vector<std::size_t> got = sel.survivors;
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("selection: all non-dominated -> largest crowding survives") {
    // Eight mutually non-dominated points on a line; interior spacing differs.
    std::vector<ObjectiveVector> pool;
    const std::vector<double> xs = {0.0, 0.05, 0.1, 0.5, 0.55, 0.6, 0.9, 1.0};
    for (double x : xs) pool.push_back({x, -x});
    const auto sel = select_survivors(pool, 4);
    const auto d = crowding_distance(pool);
    // Every survivor's crowding must be >= every non-survivor's.
    std::vector<bool> survived(pool.size(), false);
    for (std::size_t i : sel.survivors) survived[i] = true;
    double min_in = std::numeric_limits<double>::infinity(), max_out = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (survived[i])
            min_in = std::min(min_in, d[i]);
        else
            max_out = std::max(max_out, d[i]);
    }
    CHECK(min_in >= max_out);
}

TEST_CASE("selection matches a brute-force NSGA-II oracle on random pools") {
    RngStream rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t mu = 4;
        const auto pool = random_pop(2 * mu, rng, rep % 2 ? 5 : 0);
        const auto sel = select_survivors(pool, mu);

        // Oracle: order by (brute rank, brute crowding desc, index).
        const auto fronts = oracle::fronts_bf(pool);
        std::vector<int> rank(pool.size());
        std::vector<double> crowd(pool.size());
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            std::vector<ObjectiveVector> members;
            for (std::size_t i : fronts[f]) members.push_back(pool[i]);
            const auto d = oracle::crowding_bf(members);
            for (std::size_t p = 0; p < fronts[f].size(); ++p) {
                rank[fronts[f][p]] = static_cast<int>(f) + 1;
                crowd[fronts[f][p]] = d[p];
            }
        }
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rank[a] != rank[b]) return rank[a] < rank[b];
            if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
            return a < b;
        });
        const std::vector<std::size_t> expect(order.begin(), order.begin() + mu);
        CHECK(sel.survivors == expect);
    }
}

TEST_CASE("sorting is invariant to input permutation (up to tie-break)") {
    RngStream rng(123);
    const auto pop = random_pop(12, rng);
    const auto base = non_dominated_sort(pop);
    std::vector<std::size_t> perm(pop.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (int rep = 0; rep < 10; ++rep) {
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
        std::vector<ObjectiveVector> shuffled(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) shuffled[i] = pop[perm[i]];
        const auto res = non_dominated_sort(shuffled);
        for (std::size_t i = 0; i < pop.size(); ++i) CHECK(res.rank[i] == base.rank[perm[i]]);
    }
}

TEST_CASE("raising utility never worsens dominance relations") {
    RngStream rng(321);
    for (int rep = 0; rep < 500; ++rep) {
        const double fu = rng.uniform(), fr = rng.uniform(-0.5, 1.0);
        const double fu2 = fu + rng.uniform(0.0, 0.5);
        const ObjectiveVector a = objectives_of(fu, fr);
        const ObjectiveVector b = objectives_of(fu2, fr);
        const ObjectiveVector other = objectives_of(rng.uniform(), rng.uniform(-0.5, 1.0));
        if (dominates(a, other)) CHECK(dominates(b, other));
        if (dominates(other, b)) CHECK(dominates(other, a));
    }
}
