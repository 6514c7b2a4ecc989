#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "arobench/detector_set.hpp"
#include "arobench/eval.hpp"
#include "arobench/stats.hpp"

namespace arobench {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

/// The eight benchmark table columns, in report order.
inline constexpr std::array<std::string_view, 8> kMetricNames = {
    "sensitivity", "precision",    "specificity", "accuracy",
    "train_time_s", "test_time_s", "cost",        "auc",
};

inline std::optional<double> metric_value(const MetricsReport& m, std::string_view name) {
    if (name == "sensitivity") return m.sensitivity;
    if (name == "precision") return m.precision;
    if (name == "specificity") return m.specificity;
    if (name == "accuracy") return m.accuracy;
    if (name == "train_time_s") return m.train_time_s;
    if (name == "test_time_s") return m.test_time_s;
    if (name == "cost") return m.cost;
    if (name == "auc") return m.auc;
    throw std::invalid_argument("unknown metric: " + std::string(name));
}

namespace detail {
inline nlohmann::json opt_to_json(const std::optional<double>& v) {
    if (v.has_value()) return *v;
    return nullptr;
}
inline std::optional<double> opt_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}
} // namespace detail

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
    return nlohmann::json{
        {"sensitivity", detail::opt_to_json(m.sensitivity)},
        {"precision", detail::opt_to_json(m.precision)},
        {"specificity", detail::opt_to_json(m.specificity)},
        {"accuracy", detail::opt_to_json(m.accuracy)},
        {"cost", m.cost},
        {"auc", m.auc},
        {"train_time_s", m.train_time_s},
        {"test_time_s", m.test_time_s},
        {"threshold", m.threshold},
        {"confusion",
         {{"tp", m.confusion.tp},
          {"fp", m.confusion.fp},
          {"tn", m.confusion.tn},
          {"fn", m.confusion.fn}}},
    };
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
    MetricsReport m;
    m.sensitivity = detail::opt_from_json(j.at("sensitivity"));
    m.precision = detail::opt_from_json(j.at("precision"));
    m.specificity = detail::opt_from_json(j.at("specificity"));
    m.accuracy = detail::opt_from_json(j.at("accuracy"));
    m.cost = j.at("cost").get<double>();
    m.auc = j.at("auc").get<double>();
    m.train_time_s = j.at("train_time_s").get<double>();
    m.test_time_s = j.at("test_time_s").get<double>();
    m.threshold = j.value("threshold", 0.0);
    if (j.contains("confusion")) {
        const auto& c = j.at("confusion");
        m.confusion = {c.at("tp").get<std::int64_t>(), c.at("fp").get<std::int64_t>(),
                       c.at("tn").get<std::int64_t>(), c.at("fn").get<std::int64_t>()};
    }
    return m;
}

inline nlohmann::json train_stats_to_json(const TrainStats& s) {
    return nlohmann::json{
        {"iterations", s.iterations},
        {"accepted", s.accepted},
        {"final_fitness", s.final_fitness},
        {"reached_cut_point", s.reached_cut_point},
        {"train_time_s", s.train_time_s},
    };
}

inline nlohmann::json test_result_to_json(const TestResult& r) {
    nlohmann::json j{
        {"statistic", r.statistic},
        {"df", r.df.has_value() ? nlohmann::json(*r.df) : nlohmann::json(nullptr)},
        {"p_value", r.p_value},
        {"positive_rank_sum", r.positive_rank_sum},
        {"negative_rank_sum", r.negative_rank_sum},
        {"exact_p_value", detail::opt_to_json(r.exact_p_value)},
        {"note", r.note},
    };
    return j;
}

/// The two significance tests over per-split best results: a paired
/// Wilcoxon per metric (first algorithm vs second) and, per algorithm and
/// metric, a Kruskal-Wallis over the splits treated as singleton groups.
/// Splits where a metric is undefined are skipped; an entry that cannot be
/// computed at all carries an "error" field instead of a result.
inline nlohmann::json compute_benchmark_tests(const std::vector<MetricsReport>& aro,
                                              const std::vector<MetricsReport>& ais) {
    nlohmann::json wilcoxon = nlohmann::json::object();
    for (const auto name : kMetricNames) {
        PairedSamples pairs;
        const std::size_t n = std::min(aro.size(), ais.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = metric_value(aro[i], name);
            const auto b = metric_value(ais[i], name);
            if (a && b) {
                pairs.a.push_back(*a);
                pairs.b.push_back(*b);
            }
        }
        try {
            nlohmann::json entry = test_result_to_json(wilcoxon_signed_rank(pairs));
            entry["n_pairs"] = pairs.a.size();
            wilcoxon[std::string(name)] = entry;
        } catch (const std::exception& e) {
            wilcoxon[std::string(name)] = nlohmann::json{{"error", e.what()}};
        }
    }

    auto kruskal_for = [](const std::vector<MetricsReport>& reports) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto name : kMetricNames) {
            std::vector<std::vector<double>> groups;
            for (const auto& r : reports) {
                const auto v = metric_value(r, name);
                if (v) groups.push_back({*v});
            }
            try {
                out[std::string(name)] = test_result_to_json(kruskal_wallis(groups));
            } catch (const std::exception& e) {
                out[std::string(name)] = nlohmann::json{{"error", e.what()}};
            }
        }
        return out;
    };

    return nlohmann::json{
        {"wilcoxon_aro_vs_ais", wilcoxon},
        {"kruskal_wallis", {{"aro", kruskal_for(aro)}, {"ais", kruskal_for(ais)}}},
    };
}

/// Arithmetic mean of the defined entries per metric; null when no split
/// defines the metric.
inline nlohmann::json average_metrics(const std::vector<MetricsReport>& reports) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto name : kMetricNames) {
        double sum = 0;
        std::size_t count = 0;
        for (const auto& r : reports) {
            if (const auto v = metric_value(r, name)) {
                sum += *v;
                ++count;
            }
        }
        out[std::string(name)] =
            count == 0 ? nlohmann::json(nullptr) : nlohmann::json(sum / static_cast<double>(count));
    }
    return out;
}

} // namespace arobench
