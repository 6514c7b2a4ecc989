#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "arobench/eval.hpp"
#include "arobench/rng.hpp"
#include "oracles.hpp"

using namespace arobench;
using Catch::Approx;

namespace {

DetectorSet one_dim_set(Matrix detectors) {
    DetectorSet set;
    set.detectors = std::move(detectors);
    set.bounds = FeatureBounds{{0.0}, {1.0}};
    set.feature_count = 1;
    set.cut_point = 0.5;
    set.algorithm = "aro";
    return set;
}

std::vector<ScoredRecord> random_scored(Rng& rng, std::size_t n, bool allow_ties) {
    std::vector<ScoredRecord> scored;
    for (std::size_t i = 0; i < n; ++i) {
        const double score = allow_ties
                                 ? static_cast<double>(rng.below(6)) / 4.0
                                 : rng.next_unit();
        scored.push_back({score, rng.below(2) == 0 ? Label::Legitimate
                                                   : Label::Fraudulent});
    }
    return scored;
}

bool has_both_classes(const std::vector<ScoredRecord>& scored) {
    bool pos = false;
    bool neg = false;
    for (const auto& s : scored)
        (s.true_label == Label::Fraudulent ? pos : neg) = true;
    return pos && neg;
}

} // namespace

TEST_CASE("score against a detector set", "[eval]") {
    SECTION("record equal to the sole detector scores zero") {
        const auto set = one_dim_set({{0.25}});
        CHECK(score({0.25}, set) == 0.0);
    }
    SECTION("hand example with two detectors") {
        const auto set = one_dim_set({{0.0}, {1.0}});
        CHECK(score({0.5}, set) == Approx(0.5).epsilon(1e-12));
    }
    SECTION("duplicating every detector leaves the score unchanged") {
        const auto set = one_dim_set({{0.1}, {0.8}});
        auto doubled = set;
        doubled.detectors.insert(doubled.detectors.end(), set.detectors.begin(),
                                 set.detectors.end());
        Rng rng(3);
        for (int i = 0; i < 50; ++i) {
            const FeatureVector r{rng.uniform(-1.0, 2.0)};
            CHECK(score(r, set) == Approx(score(r, doubled)).epsilon(1e-12));
        }
    }
    SECTION("empty detector set is an error") {
        CHECK_THROWS_AS(score({0.5}, one_dim_set({})), std::invalid_argument);
    }
    SECTION("feature-count mismatch is an error") {
        const auto set = one_dim_set({{0.25}});
        CHECK_THROWS_AS(score({0.5, 0.5}, set), std::invalid_argument);
    }
}

TEST_CASE("classification threshold is strict on the legitimate side", "[eval]") {
    const auto set = one_dim_set({{0.0}});
    // score of {0.4} is exactly 0.4
    CHECK(classify({0.4}, set, 0.401) == Label::Legitimate);
    CHECK(classify({0.4}, set, 0.4) == Label::Fraudulent); // boundary is fraud
    CHECK(classify({0.0}, set, 0.1) == Label::Legitimate); // zero score
}

TEST_CASE("confusion counting", "[eval]") {
    SECTION("all predictions correct") {
        const std::vector<ScoredRecord> scored{
            {0.9, Label::Fraudulent}, {0.8, Label::Fraudulent}, {0.1, Label::Legitimate}};
        const auto cm = confusion(scored, 0.5);
        CHECK(cm.tp == 2);
        CHECK(cm.tn == 1);
        CHECK(cm.fp == 0);
        CHECK(cm.fn == 0);
    }
    SECTION("frauds at or above the threshold are true positives") {
        std::vector<ScoredRecord> scored;
        for (int i = 0; i < 10; ++i) scored.push_back({0.7, Label::Fraudulent});
        for (int i = 0; i < 2; ++i) scored.push_back({0.2, Label::Fraudulent});
        const auto cm = confusion(scored, 0.5);
        CHECK(cm.tp == 10);
        CHECK(cm.fn == 2);
    }
    SECTION("counts partition the input") {
        Rng rng(8);
        for (int trial = 0; trial < 100; ++trial) {
            const auto scored = random_scored(rng, 1 + rng.below(40), true);
            const auto cm = confusion(scored, rng.next_unit());
            CHECK(static_cast<std::size_t>(cm.total()) == scored.size());
        }
    }
    SECTION("empty input is an error") {
        CHECK_THROWS_AS(confusion({}, 0.5), std::invalid_argument);
    }
}

TEST_CASE("ratio metrics", "[eval]") {
    SECTION("sensitivity from tp and fn") {
        const auto m = metrics(ConfusionMatrix{8, 0, 0, 2});
        CHECK(m.sensitivity.value() == Approx(0.8));
    }
    SECTION("a 0/0 ratio is undefined, not zero") {
        const auto m = metrics(ConfusionMatrix{0, 0, 5, 0});
        CHECK_FALSE(m.precision.has_value());
        CHECK_FALSE(m.sensitivity.has_value());
        CHECK(m.specificity.value() == 1.0);
    }
    SECTION("perfect matrix gives all ones") {
        const auto m = metrics(ConfusionMatrix{4, 0, 6, 0});
        CHECK(m.sensitivity.value() == 1.0);
        CHECK(m.precision.value() == 1.0);
        CHECK(m.specificity.value() == 1.0);
        CHECK(m.accuracy.value() == 1.0);
    }
    SECTION("metrics lie in [0,1] when defined") {
        Rng rng(12);
        for (int trial = 0; trial < 200; ++trial) {
            const ConfusionMatrix cm{
                static_cast<std::int64_t>(rng.below(20)),
                static_cast<std::int64_t>(rng.below(20)),
                static_cast<std::int64_t>(rng.below(20)),
                static_cast<std::int64_t>(rng.below(20))};
            if (cm.total() == 0) continue;
            const auto m = metrics(cm);
            for (const auto& v :
                 {m.sensitivity, m.precision, m.specificity, m.accuracy}) {
                if (v) {
                    CHECK(*v >= 0.0);
                    CHECK(*v <= 1.0);
                }
            }
        }
    }
}

TEST_CASE("cost function", "[eval]") {
    CHECK(cost(ConfusionMatrix{0, 0, 0, 0}) == 0.0);
    CHECK(cost(ConfusionMatrix{1, 1, 0, 1}) == 111.0);
    CHECK(cost(ConfusionMatrix{399, 39, 0, 60}) == 6789.0);

    SECTION("linearity under componentwise addition") {
        Rng rng(14);
        for (int trial = 0; trial < 100; ++trial) {
            const ConfusionMatrix a{static_cast<std::int64_t>(rng.below(1000)),
                                    static_cast<std::int64_t>(rng.below(1000)),
                                    static_cast<std::int64_t>(rng.below(1000)),
                                    static_cast<std::int64_t>(rng.below(1000))};
            const ConfusionMatrix b{static_cast<std::int64_t>(rng.below(1000)),
                                    static_cast<std::int64_t>(rng.below(1000)),
                                    static_cast<std::int64_t>(rng.below(1000)),
                                    static_cast<std::int64_t>(rng.below(1000))};
            CHECK(cost(a + b) == cost(a) + cost(b));
        }
    }
}

TEST_CASE("roc and auc", "[eval]") {
    SECTION("perfect separation") {
        const std::vector<ScoredRecord> scored{{0.9, Label::Fraudulent},
                                               {0.8, Label::Fraudulent},
                                               {0.3, Label::Legitimate},
                                               {0.1, Label::Legitimate}};
        const auto roc = roc_auc(scored);
        CHECK(roc.auc == 1.0);
        CHECK(roc.curve.front().fpr == 0.0);
        CHECK(roc.curve.back().tpr == 1.0);
    }
    SECTION("all scores identical gives one half") {
        const std::vector<ScoredRecord> scored{{0.5, Label::Fraudulent},
                                               {0.5, Label::Legitimate},
                                               {0.5, Label::Legitimate}};
        CHECK(roc_auc(scored).auc == 0.5);
    }
    SECTION("hand example: three of four pairs won") {
        const std::vector<ScoredRecord> scored{{0.9, Label::Fraudulent},
                                               {0.4, Label::Fraudulent},
                                               {0.5, Label::Legitimate},
                                               {0.1, Label::Legitimate}};
        CHECK(roc_auc(scored).auc == Approx(0.75).epsilon(1e-15));
    }
    SECTION("single-class input is an error") {
        CHECK_THROWS_AS(roc_auc({{0.5, Label::Fraudulent}}), std::invalid_argument);
    }
}

TEST_CASE("auc equals the brute-force pairwise count", "[eval]") {
    Rng rng(20250807);
    int tested = 0;
    while (tested < 1000) {
        const bool ties = rng.below(2) == 0;
        const auto scored = random_scored(rng, 2 + rng.below(19), ties);
        if (!has_both_classes(scored)) continue;
        ++tested;
        const double fast = roc_auc(scored).auc;
        const double brute = oracles::brute_force_auc(scored);
        if (ties)
            CHECK(std::abs(fast - brute) <= 1e-12);
        else
            CHECK(fast == brute);
    }
}

TEST_CASE("auc properties", "[eval]") {
    Rng rng(555);
    SECTION("invariant under strictly increasing transforms") {
        for (int trial = 0; trial < 50; ++trial) {
            auto scored = random_scored(rng, 12, true);
            if (!has_both_classes(scored)) continue;
            const double before = roc_auc(scored).auc;
            for (auto& s : scored) s.score = std::exp(2.0 * s.score) + 1.0;
            CHECK(roc_auc(scored).auc == Approx(before).margin(1e-12));
        }
    }
    SECTION("label swap complements the auc") {
        for (int trial = 0; trial < 50; ++trial) {
            auto scored = random_scored(rng, 10, true);
            if (!has_both_classes(scored)) continue;
            const double before = roc_auc(scored).auc;
            for (auto& s : scored)
                s.true_label = (s.true_label == Label::Fraudulent) ? Label::Legitimate
                                                                   : Label::Fraudulent;
            CHECK(roc_auc(scored).auc + before == Approx(1.0).margin(1e-12));
        }
    }
    SECTION("rank statistic equals the trapezoidal area under the curve") {
        for (int trial = 0; trial < 50; ++trial) {
            const auto scored = random_scored(rng, 3 + rng.below(30), true);
            if (!has_both_classes(scored)) continue;
            const auto roc = roc_auc(scored);
            double area = 0;
            for (std::size_t i = 1; i < roc.curve.size(); ++i)
                area += (roc.curve[i].fpr - roc.curve[i - 1].fpr) *
                        0.5 * (roc.curve[i].tpr + roc.curve[i - 1].tpr);
            CHECK(area == Approx(roc.auc).margin(1e-12));
        }
    }
}

TEST_CASE("youden threshold maximizes sensitivity plus specificity", "[eval]") {
    const std::vector<ScoredRecord> scored{{0.9, Label::Fraudulent},
                                           {0.7, Label::Fraudulent},
                                           {0.6, Label::Legitimate},
                                           {0.2, Label::Legitimate},
                                           {0.1, Label::Legitimate}};
    const double t = youden_threshold(scored);
    CHECK(t == 0.7);
    const auto m = metrics(confusion(scored, t));
    CHECK(m.sensitivity.value() == 1.0);
    CHECK(m.specificity.value() == 1.0);
}

TEST_CASE("evaluate_scored assembles the full report", "[eval]") {
    const std::vector<ScoredRecord> scored{{0.9, Label::Fraudulent},
                                           {0.2, Label::Legitimate},
                                           {0.6, Label::Legitimate}};
    const auto report = evaluate_scored(scored, 0.5);
    CHECK(report.confusion == ConfusionMatrix{1, 1, 1, 0});
    CHECK(report.cost == 11.0);
    CHECK(report.auc == 1.0);
    CHECK(report.threshold == 0.5);
    CHECK(report.sensitivity.value() == 1.0);
    CHECK(report.specificity.value() == Approx(0.5));
}

TEST_CASE("timing wrapper", "[eval]") {
    const auto [value, seconds] = timed([] { return 42; });
    CHECK(value == 42);
    CHECK(seconds >= 0.0);
    CHECK(std::isfinite(seconds));
    const double again = time_call([] {});
    CHECK(again >= 0.0);
    CHECK(std::isfinite(again));
}

TEST_CASE("raising the threshold never decreases true negatives", "[eval]") {
    Rng rng(808);
    const auto scored = random_scored(rng, 200, true);
    std::int64_t previous_tn = -1;
    for (double t = -0.1; t <= 1.6; t += 0.05) {
        const auto cm = confusion(scored, t);
        CHECK(cm.tn >= previous_tn);
        previous_tn = cm.tn;
    }
}

TEST_CASE("roc csv export", "[eval]") {
    const std::vector<RocPoint> curve{{0.0, 0.0}, {0.25, 1.0}, {1.0, 1.0}};
    CHECK(roc_to_csv(curve) == "fpr,tpr\n0,0\n0.25,1\n1,1\n");
}
