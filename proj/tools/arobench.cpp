// Command-line front end: generate / train / evaluate / benchmark / stats.
// Every subcommand honors --seed, --config, --out and --parallelism; flag >
// config file > built-in default. Verbosity via ARO_BENCH_LOG=info|debug.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "arobench/commands.hpp"

namespace {

struct GlobalOptions {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    int parallelism = 1;
};

void add_global_options(CLI::App* cmd, GlobalOptions& opts) {
    cmd->add_option("--seed", opts.seed, "Seed for every random stream")
        ->capture_default_str();
    cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--parallelism", opts.parallelism,
                    "Worker pool size for independent tasks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_generator_options(CLI::App* cmd, arobench::GeneratorConfig& gen) {
    cmd->add_option("--features", gen.feature_count, "Feature count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--train-legit", gen.train_legit, "Legitimate records per training split")
        ->capture_default_str();
    cmd->add_option("--train-fraud", gen.train_fraud, "Fraudulent records per training split")
        ->capture_default_str();
    cmd->add_option("--test-legit", gen.test_legit, "Legitimate records per test split")
        ->capture_default_str();
    cmd->add_option("--test-fraud", gen.test_fraud, "Fraudulent records per test split")
        ->capture_default_str();
    cmd->add_option("--class-separation", gen.class_separation,
                    "Distance between class centers, in noise units")
        ->capture_default_str();
    cmd->add_option("--noise-scale", gen.noise_scale, "Half-width of the additive noise")
        ->capture_default_str();
}

void add_ais_options(CLI::App* cmd, arobench::AisParams& ais) {
    cmd->add_option("--ais-npop", ais.n_pop, "Detectors sampled per iteration")
        ->capture_default_str();
    cmd->add_option("--ais-nc", ais.n_c, "Best detectors cloned per iteration")
        ->capture_default_str();
    cmd->add_option("--ais-nm", ais.n_m, "Memory cells replaced per iteration")
        ->capture_default_str();
    cmd->add_option("--ais-iterations", ais.iterations, "Clonal-selection iterations")
        ->capture_default_str();
    cmd->add_option("--ais-clone-factor", ais.clone_factor, "Colony expansion factor")
        ->capture_default_str();
    cmd->add_option("--ais-mutation-rate", ais.mutation_rate,
                    "Per-gene clone mutation probability")
        ->capture_default_str();
    cmd->add_flag("--ais-faithful", ais.faithful_replacement,
                  "Replace worst memory cells unconditionally");
    cmd->add_flag("--ais-negative-selection", ais.negative_selection,
                  "Discard sampled detectors with negative fitness");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fraud-detector training and benchmarking with asexual-reproduction "
                 "optimization and a clonal-selection baseline"};
    app.set_config("--config", "",
                   "INI/TOML file with one section per subcommand; "
                   "flags given on the command line win");
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Write synthetic train/test CSV splits");
    GlobalOptions gen_globals;
    arobench::GenerateConfig generate_config;
    add_global_options(generate, gen_globals);
    add_generator_options(generate, generate_config.generator);
    generate->add_option("--splits", generate_config.num_splits, "Number of split pairs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "Train detector sets on a training CSV");
    GlobalOptions train_globals;
    arobench::TrainConfig train_config;
    std::string train_label_column = "label";
    add_global_options(train, train_globals);
    train->add_option("--train", train_config.train_csv, "Training CSV")->required();
    train->add_option("--algorithm", train_config.algorithm, "aro | ais | both")
        ->check(CLI::IsMember({"aro", "ais", "both"}))
        ->capture_default_str();
    train->add_option("--cut-point", train_config.aro.cut_point,
                      "Fitness threshold ending training (also the default test threshold)")
        ->capture_default_str();
    train->add_flag("--calibrate", train_config.calibrate,
                    "Grid-search the cut point on the training split first");
    train->add_option("--max-iters", train_config.aro.max_loop_iterations,
                      "Safety cap on training iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train->add_option("--restarts", train_config.aro.restarts, "Independent parents grown")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train->add_flag("--integer-genes", train_config.aro.integer_genes,
                    "Round sampled gene values to integers");
    train->add_option("--label-column", train_label_column, "Label column name")
        ->capture_default_str();
    add_ais_options(train, train_config.ais);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a test CSV against a detector file");
    GlobalOptions eval_globals;
    arobench::EvaluateConfig evaluate_config;
    std::string eval_policy = "cut";
    std::string eval_against = "detectors";
    std::string eval_label_column = "label";
    double eval_threshold = 0;
    add_global_options(evaluate, eval_globals);
    evaluate->add_option("--detectors", evaluate_config.detectors_file, "Detector file")
        ->required();
    evaluate->add_option("--test", evaluate_config.test_csv, "Test CSV")->required();
    auto* threshold_opt =
        evaluate->add_option("--threshold", eval_threshold, "Explicit classification threshold");
    evaluate->add_option("--threshold-policy", eval_policy,
                         "cut (stored cut point) | roc (maximize sensitivity+specificity)")
        ->check(CLI::IsMember({"cut", "roc"}))
        ->capture_default_str();
    evaluate->add_option("--score-against", eval_against,
                         "detectors | raw (training normals; needs --train)")
        ->check(CLI::IsMember({"detectors", "raw"}))
        ->capture_default_str();
    std::string eval_train_csv;
    auto* eval_train_opt =
        evaluate->add_option("--train", eval_train_csv, "Training CSV for --score-against raw");
    evaluate->add_option("--label-column", eval_label_column, "Label column name")
        ->capture_default_str();

    // benchmark
    auto* benchmark =
        app.add_subcommand("benchmark", "Train and evaluate both algorithms over many splits");
    GlobalOptions bench_globals;
    arobench::BenchmarkConfig benchmark_config;
    std::string bench_policy = "cut";
    std::string bench_data_dir;
    double bench_cut_point = 0;
    add_global_options(benchmark, bench_globals);
    add_generator_options(benchmark, benchmark_config.generator);
    add_ais_options(benchmark, benchmark_config.ais_base);
    benchmark->add_option("--splits", benchmark_config.num_splits, "Number of split pairs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    benchmark->add_option("--repeats", benchmark_config.repeats,
                          "Runs per split and algorithm; best cost is kept")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto* bench_cut_opt = benchmark->add_option(
        "--cut-point", bench_cut_point, "Cut point for every split (default: per-split table)");
    auto* bench_data_opt = benchmark->add_option(
        "--data-dir", bench_data_dir, "Load splitN_train/test.csv from here instead of generating");
    benchmark->add_option("--threshold-policy", bench_policy, "cut | roc")
        ->check(CLI::IsMember({"cut", "roc"}))
        ->capture_default_str();
    benchmark->add_option("--max-iters", benchmark_config.aro_base.max_loop_iterations,
                          "Safety cap on training iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // stats
    auto* stats = app.add_subcommand("stats", "Recompute significance tests from a report");
    GlobalOptions stats_globals;
    arobench::StatsConfig stats_config;
    add_global_options(stats, stats_globals);
    stats->add_option("--report", stats_config.report_file, "benchmark_report.json path")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            generate_config.generator.seed = gen_globals.seed;
            generate_config.out_dir = gen_globals.out_dir;
            arobench::cmd_generate(generate_config);
        } else if (train->parsed()) {
            train_config.out_dir = train_globals.out_dir;
            train_config.aro.seed = train_globals.seed;
            train_config.ais.seed = train_globals.seed;
            train_config.ais.cut_point = train_config.aro.cut_point;
            train_config.schema.label_column = train_label_column;
            arobench::cmd_train(train_config);
        } else if (evaluate->parsed()) {
            evaluate_config.out_dir = eval_globals.out_dir;
            if (threshold_opt->count() > 0) evaluate_config.threshold_override = eval_threshold;
            evaluate_config.policy = (eval_policy == "roc")
                                         ? arobench::ThresholdPolicy::Roc
                                         : arobench::ThresholdPolicy::CutPoint;
            evaluate_config.score_against = (eval_against == "raw")
                                                ? arobench::ScoreAgainst::RawNormals
                                                : arobench::ScoreAgainst::Detectors;
            if (eval_train_opt->count() > 0) evaluate_config.train_csv = eval_train_csv;
            evaluate_config.schema.label_column = eval_label_column;
            arobench::cmd_evaluate(evaluate_config);
        } else if (benchmark->parsed()) {
            benchmark_config.seed = bench_globals.seed;
            benchmark_config.out_dir = bench_globals.out_dir;
            benchmark_config.parallelism = bench_globals.parallelism;
            if (bench_cut_opt->count() > 0) benchmark_config.cut_point_override = bench_cut_point;
            if (bench_data_opt->count() > 0) benchmark_config.data_dir = bench_data_dir;
            benchmark_config.policy = (bench_policy == "roc")
                                          ? arobench::ThresholdPolicy::Roc
                                          : arobench::ThresholdPolicy::CutPoint;
            arobench::cmd_benchmark(benchmark_config);
        } else if (stats->parsed()) {
            stats_config.out_dir = stats_globals.out_dir;
            arobench::cmd_stats(stats_config);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
