#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "arobench/ais_detector.hpp"
#include "arobench/aro_detector.hpp"
#include "arobench/dataset.hpp"
#include "arobench/eval.hpp"
#include "arobench/io_util.hpp"
#include "arobench/report.hpp"

namespace arobench {

namespace fs = std::filesystem;

/// Per-split default training cut points, cycled when there are more splits.
inline constexpr std::array<double, 9> kDefaultCutPoints = {
    0.1754, 0.1841, 0.1739, 0.1762, 0.175, 0.1777, 0.176, 0.1916, 0.1749,
};

inline double default_cut_point(int split_id) {
    return kDefaultCutPoints[static_cast<std::size_t>((split_id - 1) % 9)];
}

inline fs::path split_train_path(const fs::path& dir, int split_id) {
    return dir / ("split" + std::to_string(split_id) + "_train.csv");
}
inline fs::path split_test_path(const fs::path& dir, int split_id) {
    return dir / ("split" + std::to_string(split_id) + "_test.csv");
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateConfig {
    GeneratorConfig generator;
    int num_splits = 9;
    fs::path out_dir = "out";
};

/// Writes num_splits train/test CSV pairs. All files are staged first and
/// committed together, so a failure leaves no partial output.
inline void cmd_generate(const GenerateConfig& config) {
    if (config.num_splits < 1) throw std::invalid_argument("--splits must be >= 1");
    config.generator.validate();
    const auto splits = generate_splits(config.generator, config.num_splits);
    std::vector<std::pair<fs::path, std::string>> files;
    files.reserve(splits.size() * 2);
    for (const auto& split : splits) {
        files.emplace_back(split_train_path(config.out_dir, split.split_id),
                           to_csv(split.train));
        files.emplace_back(split_test_path(config.out_dir, split.split_id),
                           to_csv(split.test));
    }
    atomic_write_files(files);
    log_info("generated " + std::to_string(splits.size()) + " split pairs into " +
             config.out_dir.string());
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainConfig {
    fs::path train_csv;
    fs::path out_dir = "out";
    std::string algorithm = "aro"; // aro | ais | both
    AroTrainParams aro;
    AisParams ais;
    /// Pick the ARO cut point on the training split before the final run.
    bool calibrate = false;
    std::vector<double> calibration_grid = default_cut_point_grid();
    CsvSchema schema;
};

/// Trains the selected algorithm(s) on one split, persists the detector
/// set(s) and a train report with stats and timings.
inline nlohmann::json cmd_train(const TrainConfig& config) {
    const bool run_aro = config.algorithm == "aro" || config.algorithm == "both";
    const bool run_ais = config.algorithm == "ais" || config.algorithm == "both";
    if (!run_aro && !run_ais)
        throw std::invalid_argument("--algorithm must be aro, ais or both");

    const Dataset train_split = load_csv(config.train_csv, config.schema);

    nlohmann::json report{
        {"schema_version", kReportSchemaVersion},
        {"tool_version", std::string(kToolVersion)},
        {"train_file", config.train_csv.string()},
    };
    std::vector<std::pair<fs::path, std::string>> files;

    if (run_aro) {
        AroTrainParams params = config.aro;
        if (config.calibrate)
            params.cut_point =
                calibrate_cut_point(train_split, params, config.calibration_grid);
        const DetectorSet set = train_aro(train_split, params);
        files.emplace_back(config.out_dir / "aro_detectors.txt", detector_set_to_text(set));
        report["aro"] = {
            {"cut_point", set.cut_point},
            {"calibrated", config.calibrate},
            {"detector_count", set.detectors.size()},
            {"stats", train_stats_to_json(set.stats)},
        };
    }
    if (run_ais) {
        const DetectorSet set = train_ais(train_split, config.ais);
        files.emplace_back(config.out_dir / "ais_detectors.txt", detector_set_to_text(set));
        report["ais"] = {
            {"cut_point", set.cut_point},
            {"detector_count", set.detectors.size()},
            {"stats", train_stats_to_json(set.stats)},
        };
    }

    files.emplace_back(config.out_dir / "train_report.json", report.dump(2) + "\n");
    atomic_write_files(files);
    return report;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

enum class ThresholdPolicy { CutPoint, Roc };
enum class ScoreAgainst { Detectors, RawNormals };

struct EvaluateConfig {
    fs::path detectors_file;
    fs::path test_csv;
    fs::path out_dir = "out";
    /// Explicit threshold; wins over the policy.
    std::optional<double> threshold_override;
    ThresholdPolicy policy = ThresholdPolicy::CutPoint;
    ScoreAgainst score_against = ScoreAgainst::Detectors;
    /// Training CSV; required when scoring against the raw normals.
    std::optional<fs::path> train_csv;
    CsvSchema schema;
};

/// Scores a test split against a persisted detector set and writes the
/// metrics report plus the ROC curve.
inline MetricsReport cmd_evaluate(const EvaluateConfig& config) {
    const DetectorSet set = load_detectors(config.detectors_file);
    const Dataset test_split = load_csv(config.test_csv, config.schema);
    if (test_split.feature_count() != set.feature_count)
        throw std::invalid_argument(
            "feature count mismatch: detectors have " +
            std::to_string(set.feature_count) + ", test data has " +
            std::to_string(test_split.feature_count()));

    std::vector<ScoredRecord> scored;
    double test_seconds = 0;
    if (config.score_against == ScoreAgainst::RawNormals) {
        if (!config.train_csv)
            throw std::invalid_argument("--score-against raw requires --train");
        const Dataset train_split = load_csv(*config.train_csv, config.schema);
        if (train_split.feature_count() != set.feature_count)
            throw std::invalid_argument("feature count mismatch between detectors and --train");
        auto [legal, fraud] = class_partition(train_split);
        const DistanceKernel kernel(legal, set.bounds);
        std::tie(scored, test_seconds) = timed([&] {
            std::vector<ScoredRecord> s;
            s.reserve(test_split.size());
            for (const auto& rec : test_split.records())
                s.push_back({kernel.mean_abs_distance(rec.features), rec.label});
            return s;
        });
    } else {
        std::tie(scored, test_seconds) =
            timed([&] { return score_dataset(test_split, set); });
    }

    double threshold = set.cut_point;
    if (config.threshold_override)
        threshold = *config.threshold_override;
    else if (config.policy == ThresholdPolicy::Roc)
        threshold = youden_threshold(scored);

    MetricsReport report = evaluate_scored(scored, threshold);
    report.test_time_s = test_seconds;

    nlohmann::json j = metrics_to_json(report);
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = std::string(kToolVersion);
    j["detectors_file"] = config.detectors_file.string();
    j["algorithm"] = set.algorithm;

    std::vector<std::pair<fs::path, std::string>> files;
    files.emplace_back(config.out_dir / "metrics.json", j.dump(2) + "\n");
    files.emplace_back(config.out_dir / "roc.csv", roc_to_csv(roc_auc(scored).curve));
    atomic_write_files(files);
    return report;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkConfig {
    GeneratorConfig generator;
    int num_splits = 9;
    /// Repeat runs per split and algorithm; the best-cost run is reported.
    int repeats = 3;
    std::uint64_t seed = 42;
    int parallelism = 1;
    fs::path out_dir = "out";
    /// Load split CSVs from here instead of generating.
    std::optional<fs::path> data_dir;
    /// One cut point for every split; defaults to the per-split table.
    std::optional<double> cut_point_override;
    AroTrainParams aro_base;
    AisParams ais_base;
    ThresholdPolicy policy = ThresholdPolicy::CutPoint;
    CsvSchema schema;
};

namespace detail {

struct BenchmarkRun {
    MetricsReport metrics;
    TrainStats train_stats;
    std::size_t detector_count = 0;
};

template <typename Task>
void run_pool(std::size_t task_count, int parallelism, Task&& task) {
    if (parallelism <= 1) {
        for (std::size_t i = 0; i < task_count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const auto worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), task_count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= task_count) return;
                try {
                    task(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::string iso_timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

/// Reproduces the full evaluation protocol: per split and algorithm, repeat
/// R runs, keep the best-cost run, tabulate the eight metrics with an
/// average row, and attach the Wilcoxon and Kruskal-Wallis results.
inline nlohmann::json cmd_benchmark(const BenchmarkConfig& config) {
    if (config.num_splits < 1) throw std::invalid_argument("--splits must be >= 1");
    if (config.repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
    if (config.parallelism < 1) throw std::invalid_argument("--parallelism must be >= 1");

    std::vector<SplitPair> splits;
    if (config.data_dir) {
        for (int id = 1; id <= config.num_splits; ++id) {
            try {
                splits.push_back(SplitPair{
                    load_csv(split_train_path(*config.data_dir, id), config.schema),
                    load_csv(split_test_path(*config.data_dir, id), config.schema), id});
            } catch (const std::exception& e) {
                throw std::runtime_error("split " + std::to_string(id) + ": " + e.what());
            }
        }
    } else {
        GeneratorConfig gen = config.generator;
        gen.seed = config.seed;
        splits = generate_splits(gen, config.num_splits);
    }

    auto cut_for = [&](int split_id) {
        return config.cut_point_override ? *config.cut_point_override
                                         : default_cut_point(split_id);
    };

    // Task layout: split-major, then algorithm (0 = aro, 1 = ais), then run.
    const auto runs = static_cast<std::size_t>(config.repeats);
    const std::size_t per_split = 2 * runs;
    const std::size_t task_count = static_cast<std::size_t>(config.num_splits) * per_split;
    std::vector<detail::BenchmarkRun> results(task_count);

    detail::run_pool(task_count, config.parallelism, [&](std::size_t task) {
        const auto split_index = task / per_split;
        const auto within = task % per_split;
        const int algo = static_cast<int>(within / runs);
        const auto run = static_cast<std::uint64_t>(within % runs);
        const SplitPair& split = splits[split_index];
        const std::uint64_t task_seed = derive_seed(
            config.seed,
            (static_cast<std::uint64_t>(algo) << 32) |
                static_cast<std::uint64_t>(split.split_id),
            run);

        DetectorSet set;
        if (algo == 0) {
            AroTrainParams params = config.aro_base;
            params.cut_point = cut_for(split.split_id);
            params.seed = task_seed;
            set = train_aro(split.train, params);
        } else {
            AisParams params = config.ais_base;
            params.cut_point = cut_for(split.split_id);
            params.seed = task_seed;
            set = train_ais(split.train, params);
        }

        auto [scored, test_seconds] =
            timed([&] { return score_dataset(split.test, set); });
        const double threshold = (config.policy == ThresholdPolicy::Roc)
                                     ? youden_threshold(scored)
                                     : set.cut_point;
        detail::BenchmarkRun result;
        result.metrics = evaluate_scored(scored, threshold);
        result.metrics.train_time_s = set.stats.train_time_s;
        result.metrics.test_time_s = test_seconds;
        result.train_stats = set.stats;
        result.detector_count = set.detectors.size();
        results[task] = std::move(result);
        log_debug("split " + std::to_string(split.split_id) + " " +
                  (algo == 0 ? "aro" : "ais") + " run " + std::to_string(run) +
                  " cost " + std::to_string(result.metrics.cost));
    });

    nlohmann::json report{
        {"schema_version", kReportSchemaVersion},
        {"tool_version", std::string(kToolVersion)},
        {"config",
         {{"num_splits", config.num_splits},
          {"repeats", config.repeats},
          {"seed", config.seed},
          {"threshold_policy",
           config.policy == ThresholdPolicy::Roc ? "roc" : "cut_point"},
          {"data_dir", config.data_dir ? nlohmann::json(config.data_dir->string())
                                       : nlohmann::json(nullptr)},
          {"generator",
           {{"feature_count", config.generator.feature_count},
            {"train_legit", config.generator.train_legit},
            {"train_fraud", config.generator.train_fraud},
            {"test_legit", config.generator.test_legit},
            {"test_fraud", config.generator.test_fraud},
            {"class_separation", config.generator.class_separation},
            {"noise_scale", config.generator.noise_scale}}},
          {"ais",
           {{"n_pop", config.ais_base.n_pop},
            {"n_c", config.ais_base.n_c},
            {"n_m", config.ais_base.n_m},
            {"iterations", config.ais_base.iterations}}}}},
    };

    std::vector<MetricsReport> aro_best;
    std::vector<MetricsReport> ais_best;
    nlohmann::json split_entries = nlohmann::json::array();
    for (std::size_t s = 0; s < splits.size(); ++s) {
        nlohmann::json entry{{"split_id", splits[s].split_id},
                             {"cut_point", cut_for(splits[s].split_id)}};
        for (int algo = 0; algo < 2; ++algo) {
            std::size_t best = 0;
            nlohmann::json run_entries = nlohmann::json::array();
            for (std::size_t run = 0; run < runs; ++run) {
                const auto& r = results[s * per_split +
                                        static_cast<std::size_t>(algo) * runs + run];
                run_entries.push_back(metrics_to_json(r.metrics));
                const auto& best_so_far =
                    results[s * per_split + static_cast<std::size_t>(algo) * runs + best];
                if (r.metrics.cost < best_so_far.metrics.cost) best = run;
            }
            const auto& chosen =
                results[s * per_split + static_cast<std::size_t>(algo) * runs + best];
            (algo == 0 ? aro_best : ais_best).push_back(chosen.metrics);
            entry[algo == 0 ? "aro" : "ais"] = {
                {"best_run", best},
                {"best", metrics_to_json(chosen.metrics)},
                {"train_stats", train_stats_to_json(chosen.train_stats)},
                {"detector_count", chosen.detector_count},
                {"runs", run_entries},
            };
        }
        split_entries.push_back(std::move(entry));
    }
    report["splits"] = std::move(split_entries);
    report["averages"] = {{"aro", average_metrics(aro_best)},
                          {"ais", average_metrics(ais_best)}};
    report["tests"] = compute_benchmark_tests(aro_best, ais_best);
    report["meta"] = {{"parallelism", config.parallelism},
                      {"created_at", detail::iso_timestamp_utc()}};

    // Flat CSV exports of the metric table and the test table.
    std::string metrics_csv = "split,algorithm";
    for (const auto name : kMetricNames) metrics_csv += "," + std::string(name);
    metrics_csv += "\n";
    auto append_metrics_row = [&](const std::string& split_label, const std::string& algo,
                                  const MetricsReport& m) {
        metrics_csv += split_label + "," + algo;
        for (const auto name : kMetricNames) {
            const auto v = metric_value(m, name);
            metrics_csv += ",";
            if (v) metrics_csv += format_value(*v);
        }
        metrics_csv += "\n";
    };
    for (std::size_t s = 0; s < splits.size(); ++s) {
        append_metrics_row(std::to_string(splits[s].split_id), "aro", aro_best[s]);
        append_metrics_row(std::to_string(splits[s].split_id), "ais", ais_best[s]);
    }
    for (const auto& [algo, reports] :
         {std::pair{"aro", &aro_best}, std::pair{"ais", &ais_best}}) {
        metrics_csv += std::string("average,") + algo;
        const auto averages = average_metrics(*reports);
        for (const auto name : kMetricNames) {
            const auto& v = averages.at(std::string(name));
            metrics_csv += ",";
            if (!v.is_null()) metrics_csv += format_value(v.get<double>());
        }
        metrics_csv += "\n";
    }

    std::string tests_csv = "test,algorithm,metric,statistic,p_value\n";
    for (const auto name : kMetricNames) {
        const auto& w = report["tests"]["wilcoxon_aro_vs_ais"][std::string(name)];
        tests_csv += "wilcoxon,aro_vs_ais," + std::string(name) + ",";
        if (w.contains("error"))
            tests_csv += ",\n";
        else
            tests_csv += format_value(w["statistic"].get<double>()) + "," +
                         format_value(w["p_value"].get<double>()) + "\n";
    }
    for (const char* algo : {"aro", "ais"}) {
        for (const auto name : kMetricNames) {
            const auto& k = report["tests"]["kruskal_wallis"][algo][std::string(name)];
            tests_csv += std::string("kruskal_wallis,") + algo + "," + std::string(name) + ",";
            if (k.contains("error"))
                tests_csv += ",\n";
            else
                tests_csv += format_value(k["statistic"].get<double>()) + "," +
                             format_value(k["p_value"].get<double>()) + "\n";
        }
    }

    atomic_write_files({
        {config.out_dir / "benchmark_report.json", report.dump(2) + "\n"},
        {config.out_dir / "benchmark_metrics.csv", metrics_csv},
        {config.out_dir / "benchmark_tests.csv", tests_csv},
    });
    return report;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsConfig {
    fs::path report_file;
    fs::path out_dir = "out";
};

/// Recomputes both significance tests from the per-split metrics stored in a
/// benchmark report, so the embedded results can be audited independently.
inline nlohmann::json cmd_stats(const StatsConfig& config) {
    nlohmann::json report;
    try {
        report = nlohmann::json::parse(read_file(config.report_file));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(config.report_file.string() +
                                 ": malformed report: " + e.what());
    }
    if (!report.contains("splits"))
        throw std::runtime_error(config.report_file.string() +
                                 ": malformed report: no 'splits' array");

    std::vector<MetricsReport> aro_best;
    std::vector<MetricsReport> ais_best;
    try {
        for (const auto& entry : report.at("splits")) {
            aro_best.push_back(metrics_from_json(entry.at("aro").at("best")));
            ais_best.push_back(metrics_from_json(entry.at("ais").at("best")));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(config.report_file.string() +
                                 ": malformed report: " + e.what());
    }

    nlohmann::json out{
        {"schema_version", kReportSchemaVersion},
        {"tool_version", std::string(kToolVersion)},
        {"source_report", config.report_file.string()},
        {"tests", compute_benchmark_tests(aro_best, ais_best)},
    };
    atomic_write_file(config.out_dir / "stats.json", out.dump(2) + "\n");
    return out;
}

} // namespace arobench
