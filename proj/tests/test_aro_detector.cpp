#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <limits>

#include "arobench/aro_detector.hpp"
#include "arobench/dataset.hpp"

using namespace arobench;
using Catch::Approx;

namespace {

Dataset small_split(std::size_t legit, std::size_t fraud, double separation,
                    std::uint64_t seed, int features = 4) {
    GeneratorConfig config;
    config.feature_count = features;
    config.train_legit = legit;
    config.train_fraud = fraud;
    config.test_legit = 1;
    config.test_fraud = 1;
    config.class_separation = separation;
    config.seed = seed;
    return generate_split(config, 1).train;
}

bool within_bounds(const FeatureVector& v, const FeatureBounds& b) {
    for (int i = 0; i < b.feature_count(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (v[u] < b.min[u] || v[u] > b.max[u]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("mutation probability follows 1/(1+ln(E-S+1))", "[aro_detector]") {
    CHECK(mutation_probability(3, 3) == 1.0);
    CHECK(mutation_probability(1, 17) == Approx(0.26087773109487916).margin(1e-12));
    CHECK(mutation_probability(5, 8) == Approx(0.41905978419640516).margin(1e-12));
    CHECK_THROWS_AS(mutation_probability(5, 4), std::invalid_argument);
    CHECK_THROWS_AS(mutation_probability(0, 4), std::invalid_argument);
}

TEST_CASE("random parent sampling", "[aro_detector]") {
    SECTION("degenerate bounds give exactly that point") {
        const FeatureBounds bounds{{1.0, -2.0}, {1.0, -2.0}};
        Rng rng(5);
        CHECK(random_parent(bounds, rng) == FeatureVector{1.0, -2.0});
    }
    SECTION("every gene stays within its bounds") {
        const FeatureBounds bounds{{-1.0, 0.0, 10.0}, {2.0, 0.5, 30.0}};
        Rng rng(6);
        for (int i = 0; i < 10000; ++i)
            CHECK(within_bounds(random_parent(bounds, rng), bounds));
    }
    SECTION("per-gene mean approaches the midpoint") {
        const FeatureBounds bounds{{-2.0, 10.0}, {6.0, 11.0}};
        Rng rng(7);
        double sums[2] = {0, 0};
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            const auto p = random_parent(bounds, rng);
            sums[0] += p[0];
            sums[1] += p[1];
        }
        CHECK(sums[0] / draws == Approx(2.0).margin(0.08));   // 1% of range 8
        CHECK(sums[1] / draws == Approx(10.5).margin(0.01));  // 1% of range 1
    }
    SECTION("integer mode rounds sampled genes") {
        const FeatureBounds bounds{{0.0}, {10.0}};
        Rng rng(8);
        for (int i = 0; i < 100; ++i) {
            const auto p = random_parent(bounds, rng, true);
            CHECK(p[0] == std::round(p[0]));
        }
    }
}

TEST_CASE("bud mutation", "[aro_detector]") {
    const FeatureBounds bounds{{0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}};
    const FeatureVector parent{0.5, 0.5, 0.5, 0.5};

    SECTION("a window of one always resamples that gene") {
        Rng rng(11);
        for (int i = 0; i < 200; ++i) {
            const auto bud = mutate_bud_window(parent, bounds, 2, 1, rng);
            CHECK(bud[0] == parent[0]);
            CHECK(bud[1] == parent[1]);
            CHECK(bud[3] == parent[3]);
            CHECK(bud[2] != parent[2]); // new uniform draw, a.s. different
        }
    }
    SECTION("genes outside the window never change") {
        Rng rng(12);
        for (int trial = 0; trial < 300; ++trial) {
            const std::size_t start = rng.below(parent.size());
            const std::size_t len = 1 + rng.below(parent.size() - start);
            const auto bud = mutate_bud_window(parent, bounds, start, len, rng);
            for (std::size_t i = 0; i < bud.size(); ++i) {
                if (i < start || i >= start + len)
                    CHECK(bud[i] == parent[i]);
                else if (bud[i] != parent[i]) {
                    CHECK(bud[i] >= 0.0);
                    CHECK(bud[i] <= 1.0);
                }
            }
        }
    }
    SECTION("per-gene mutation frequency matches P for a window of four") {
        Rng rng(13);
        const int buds = 10000;
        std::int64_t mutated = 0;
        for (int i = 0; i < buds; ++i) {
            const auto bud = mutate_bud_window(parent, bounds, 0, 4, rng);
            for (std::size_t g = 0; g < 4; ++g)
                if (bud[g] != parent[g]) ++mutated;
        }
        const double frequency = static_cast<double>(mutated) / (4.0 * buds);
        CHECK(frequency == Approx(0.41905978419640516).margin(0.02));
    }
}

TEST_CASE("training terminates immediately on a satisfied cut point", "[aro_detector]") {
    const Dataset split = small_split(30, 5, 3.0, 42);
    AroTrainParams params;
    params.cut_point = -std::numeric_limits<double>::infinity();
    params.seed = 1;
    const AroTrainOutput out = train_aro_detailed(split, params);
    CHECK(out.set.detectors.size() == 1);
    CHECK(out.set.stats.iterations == 0);
    CHECK(out.set.stats.accepted == 0);
    CHECK(out.set.stats.reached_cut_point);
    REQUIRE(out.fitness_traces.size() == 1);
    CHECK(out.fitness_traces[0].size() == 1);
}

TEST_CASE("training reaches a reachable cut point and the trace ratchets",
          "[aro_detector]") {
    const Dataset split = small_split(400, 40, 3.0, 7);
    AroTrainParams params;
    params.cut_point = 0.55; // above the typical random-start fitness
    params.max_loop_iterations = 50000;
    params.seed = 2;
    const AroTrainOutput out = train_aro_detailed(split, params);
    const DetectorSet& set = out.set;

    CHECK(set.stats.reached_cut_point);
    CHECK(set.stats.final_fitness >= params.cut_point);
    CHECK(set.stats.accepted >= 1);
    CHECK(set.detectors.size() ==
          static_cast<std::size_t>(set.stats.accepted) + 1);

    REQUIRE(out.fitness_traces.size() == 1);
    const auto& trace = out.fitness_traces[0];
    CHECK(std::is_sorted(trace.begin(), trace.end()));
    // replacements are strict improvements
    std::int64_t improvements = 0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] != trace[i - 1]) {
            CHECK(trace[i] > trace[i - 1]);
            ++improvements;
        }
    CHECK(improvements == set.stats.accepted);

    // every detector lies within the legitimate-matrix sampling bounds
    const auto [legal, fraud] = class_partition(split);
    const FeatureBounds legal_bounds = compute_bounds(legal);
    for (const auto& d : set.detectors) CHECK(within_bounds(d, legal_bounds));

    // normalization bounds stored in the set span the full split
    const Matrix all = [&] {
        Matrix m = legal;
        m.insert(m.end(), fraud.begin(), fraud.end());
        return m;
    }();
    CHECK(set.bounds == compute_bounds(all));
}

TEST_CASE("training is bit-identical for a fixed seed", "[aro_detector]") {
    const Dataset split = small_split(120, 12, 2.5, 77);
    AroTrainParams params;
    params.cut_point = 0.45;
    params.seed = 99;
    params.restarts = 2;
    const DetectorSet a = train_aro(split, params);
    const DetectorSet b = train_aro(split, params);
    CHECK(a.detectors == b.detectors);
    CHECK(a.stats.iterations == b.stats.iterations);
    CHECK(a.stats.accepted == b.stats.accepted);
    CHECK(a.stats.final_fitness == b.stats.final_fitness);
    // detector count adds one initial parent per restart
    CHECK(a.detectors.size() == static_cast<std::size_t>(a.stats.accepted) + 2);

    AroTrainParams other = params;
    other.seed = 100;
    CHECK(train_aro(split, other).detectors != a.detectors);
}

TEST_CASE("an unreachable cut point hits the cap and is flagged", "[aro_detector]") {
    const Dataset split = small_split(60, 6, 1.0, 3);
    AroTrainParams params;
    params.cut_point = 10.0; // fitness is bounded well below this
    params.max_loop_iterations = 500;
    params.seed = 5;
    const DetectorSet set = train_aro(split, params);
    CHECK_FALSE(set.stats.reached_cut_point);
    CHECK(set.stats.iterations == 500);
    CHECK(set.stats.final_fitness < params.cut_point);
}

TEST_CASE("training requires both classes", "[aro_detector]") {
    const Dataset all_legit(std::vector<TransactionRecord>{
        {{1.0, 2.0}, Label::Legitimate},
        {{2.0, 1.0}, Label::Legitimate},
    });
    CHECK_THROWS_AS(train_aro(all_legit, AroTrainParams{}), std::invalid_argument);
}

TEST_CASE("first-parent scoring is switchable", "[aro_detector]") {
    const Dataset split = small_split(50, 5, 2.0, 21);
    AroTrainParams params;
    params.cut_point = std::numeric_limits<double>::infinity();
    params.max_loop_iterations = 1;
    params.seed = 8;

    params.first_parent_score = FirstParentScore::Difference;
    const auto diff_out = train_aro_detailed(split, params);
    params.first_parent_score = FirstParentScore::NormalDistanceOnly;
    const auto nd_out = train_aro_detailed(split, params);

    // same seed, same parent; only the recorded first score differs
    CHECK(diff_out.set.detectors[0] == nd_out.set.detectors[0]);
    const FitnessContext ctx = FitnessContext::from_dataset(split);
    CHECK(diff_out.fitness_traces[0][0] ==
          Approx(fitness(diff_out.set.detectors[0], ctx)).margin(1e-15));
    CHECK(nd_out.fitness_traces[0][0] ==
          Approx(normal_distance(nd_out.set.detectors[0], ctx)).margin(1e-15));
}

TEST_CASE("cut point calibration", "[aro_detector]") {
    SECTION("a one-element grid returns that element") {
        const Dataset split = small_split(40, 4, 2.0, 14);
        AroTrainParams base;
        base.seed = 3;
        CHECK(calibrate_cut_point(split, base, {0.19}) == 0.19);
    }
    SECTION("the default grid spans 0.15 to 0.20 in 0.005 steps") {
        const auto grid = default_cut_point_grid();
        REQUIRE(grid.size() == 11);
        CHECK(grid.front() == Approx(0.15));
        CHECK(grid.back() == Approx(0.20));
        for (std::size_t i = 1; i < grid.size(); ++i)
            CHECK(grid[i] - grid[i - 1] == Approx(0.005));
    }
    SECTION("the returned cut point has minimal training cost over the grid") {
        const Dataset split = small_split(200, 20, 3.0, 15);
        AroTrainParams base;
        base.seed = 4;
        const std::vector<double> grid{0.1, 0.3, 0.5};
        const double chosen = calibrate_cut_point(split, base, grid);

        auto cost_for = [&](double candidate) {
            AroTrainParams params = base;
            params.cut_point = candidate;
            params.max_loop_iterations = std::min<std::int64_t>(params.max_loop_iterations, 5000);
            const DetectorSet set = train_aro(split, params);
            return cost(confusion(score_dataset(split, set), candidate));
        };
        const double chosen_cost = cost_for(chosen);
        for (const double candidate : grid) CHECK(chosen_cost <= cost_for(candidate));
    }
    SECTION("an empty grid is an error") {
        const Dataset split = small_split(20, 2, 2.0, 16);
        CHECK_THROWS_AS(calibrate_cut_point(split, AroTrainParams{}, {}),
                        std::invalid_argument);
    }
}
