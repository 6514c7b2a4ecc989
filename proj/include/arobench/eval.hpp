#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arobench/detector_set.hpp"
#include "arobench/fitness.hpp"

namespace arobench {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }

    ConfusionMatrix operator+(const ConfusionMatrix& o) const {
        return {tp + o.tp, fp + o.fp, tn + o.tn, fn + o.fn};
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Ratio metrics are std::nullopt when their denominator is zero; averaging
/// code must skip undefined entries instead of silently absorbing zeros.
struct MetricsReport {
    std::optional<double> sensitivity;
    std::optional<double> precision;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    double cost = 0;
    double auc = 0;
    double train_time_s = 0;
    double test_time_s = 0;
    ConfusionMatrix confusion;
    double threshold = 0;
};

struct ScoredRecord {
    double score = 0;
    Label true_label = Label::Legitimate;
};

/// Scores records against a detector set: the mean normalized absolute
/// distance of the record to all detectors (the "final distance"), using the
/// bounds stored at train time. Higher means more fraud-like.
class DetectorScorer {
public:
    explicit DetectorScorer(const DetectorSet& set)
        : kernel_(set.detectors, set.bounds) {
        if (set.detectors.empty())
            throw std::invalid_argument("DetectorScorer: empty detector set");
        if (set.feature_count != set.bounds.feature_count())
            throw std::invalid_argument("DetectorScorer: inconsistent feature count");
    }

    double score(const FeatureVector& record) const {
        return kernel_.mean_abs_distance(record);
    }

private:
    DistanceKernel kernel_;
};

inline double score(const FeatureVector& record, const DetectorSet& detectors) {
    return DetectorScorer(detectors).score(record);
}

/// A record is legitimate iff its final distance is strictly below the
/// threshold; a boundary score counts as fraudulent.
inline Label classify(const FeatureVector& record, const DetectorSet& detectors,
                      double threshold) {
    return score(record, detectors) < threshold ? Label::Legitimate
                                                : Label::Fraudulent;
}

inline std::vector<ScoredRecord> score_dataset(const Dataset& dataset,
                                               const DetectorSet& detectors) {
    DetectorScorer scorer(detectors);
    std::vector<ScoredRecord> scored;
    scored.reserve(dataset.size());
    for (const auto& rec : dataset.records())
        scored.push_back({scorer.score(rec.features), rec.label});
    return scored;
}

/// Counts with Fraudulent as the positive class.
inline ConfusionMatrix confusion(const std::vector<ScoredRecord>& scored,
                                 double threshold) {
    if (scored.empty()) throw std::invalid_argument("confusion: no scored records");
    ConfusionMatrix cm;
    for (const auto& s : scored) {
        const bool predicted_fraud = !(s.score < threshold);
        if (s.true_label == Label::Fraudulent)
            predicted_fraud ? ++cm.tp : ++cm.fn;
        else
            predicted_fraud ? ++cm.fp : ++cm.tn;
    }
    return cm;
}

namespace detail {
inline std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}
} // namespace detail

/// Ratio metrics only; cost/auc/timings are filled in by the callers that
/// have them.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw std::invalid_argument("metrics: empty confusion matrix");
    MetricsReport report;
    report.confusion = cm;
    report.sensitivity = detail::ratio(cm.tp, cm.tp + cm.fn);
    report.precision = detail::ratio(cm.tp, cm.tp + cm.fp);
    report.specificity = detail::ratio(cm.tn, cm.fp + cm.tn);
    report.accuracy = detail::ratio(cm.tp + cm.tn, cm.total());
    return report;
}

/// Domain loss: a missed fraud costs 100, a false alarm 10, and every
/// detected fraud still pays 1 for the verification.
inline double cost(const ConfusionMatrix& cm) {
    return 100.0 * static_cast<double>(cm.fn) + 10.0 * static_cast<double>(cm.fp) +
           static_cast<double>(cm.tp);
}

struct RocPoint {
    double fpr = 0;
    double tpr = 0;
};

struct RocResult {
    std::vector<RocPoint> curve;
    double auc = 0;
};

/// Threshold-swept ROC curve plus the rank-statistic AUC (ties count 1/2).
/// The rank form equals the trapezoidal area under the swept curve.
inline RocResult roc_auc(const std::vector<ScoredRecord>& scored) {
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    for (const auto& s : scored) {
        if (!std::isfinite(s.score))
            throw std::invalid_argument("roc_auc: non-finite score");
        (s.true_label == Label::Fraudulent) ? ++positives : ++negatives;
    }
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("roc_auc: need at least one record of each class");

    std::vector<ScoredRecord> sorted = scored;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredRecord& a, const ScoredRecord& b) {
                  return a.score > b.score;
              });

    RocResult result;
    result.curve.push_back({0.0, 0.0});
    // Mann-Whitney numerator: wins of fraud over legitimate plus half-ties,
    // accumulated per distinct-score group.
    long double wins = 0.0L;
    std::int64_t seen_neg = 0;
    std::int64_t cum_tp = 0;
    std::int64_t cum_fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        std::int64_t group_pos = 0;
        std::int64_t group_neg = 0;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            (sorted[j].true_label == Label::Fraudulent) ? ++group_pos : ++group_neg;
            ++j;
        }
        // Positives in this group beat every negative strictly below and
        // tie with the group's negatives.
        wins += static_cast<long double>(group_pos) *
                    static_cast<long double>(negatives - seen_neg - group_neg) +
                0.5L * static_cast<long double>(group_pos) *
                    static_cast<long double>(group_neg);
        seen_neg += group_neg;
        cum_tp += group_pos;
        cum_fp += group_neg;
        result.curve.push_back({static_cast<double>(cum_fp) / static_cast<double>(negatives),
                                static_cast<double>(cum_tp) / static_cast<double>(positives)});
        i = j;
    }
    result.auc = static_cast<double>(
        wins / (static_cast<long double>(positives) * static_cast<long double>(negatives)));
    return result;
}

/// Classification threshold maximizing sensitivity + specificity over the
/// distinct scores (the top-left-corner point of the ROC curve). Ties break
/// toward the smaller threshold. With the >=-is-fraud rule, every candidate
/// threshold is one of the observed scores.
inline double youden_threshold(const std::vector<ScoredRecord>& scored) {
    if (scored.empty()) throw std::invalid_argument("youden_threshold: no scored records");
    std::vector<double> candidates;
    candidates.reserve(scored.size());
    for (const auto& s : scored) candidates.push_back(s.score);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_threshold = candidates.front();
    double best_j = -2.0;
    for (const double t : candidates) {
        const ConfusionMatrix cm = confusion(scored, t);
        const auto m = metrics(cm);
        const double j = m.sensitivity.value_or(0.0) + m.specificity.value_or(0.0) - 1.0;
        if (j > best_j) {
            best_j = j;
            best_threshold = t;
        }
    }
    return best_threshold;
}

/// Full test-phase report at a threshold: ratios, cost, AUC and the
/// confusion counts. Timings are attached by the caller.
inline MetricsReport evaluate_scored(const std::vector<ScoredRecord>& scored,
                                     double threshold) {
    MetricsReport report = metrics(confusion(scored, threshold));
    report.cost = cost(report.confusion);
    report.auc = roc_auc(scored).auc;
    report.threshold = threshold;
    return report;
}

/// Wall-clock wrapper on the monotonic clock.
template <typename F>
auto timed(F&& operation)
    -> std::pair<decltype(operation()), double> {
    const auto start = std::chrono::steady_clock::now();
    auto value = operation();
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    return {std::move(value), elapsed.count()};
}

template <typename F>
double time_call(F&& operation) {
    const auto start = std::chrono::steady_clock::now();
    operation();
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    return elapsed.count();
}

/// Two-column CSV (fpr, tpr) for external plotting.
inline std::string roc_to_csv(const std::vector<RocPoint>& curve) {
    std::string out = "fpr,tpr\n";
    for (const auto& p : curve)
        out += format_value(p.fpr) + "," + format_value(p.tpr) + "\n";
    return out;
}

} // namespace arobench
