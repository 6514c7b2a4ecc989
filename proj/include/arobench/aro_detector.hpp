#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "arobench/detector_set.hpp"
#include "arobench/eval.hpp"
#include "arobench/fitness.hpp"
#include "arobench/rng.hpp"

namespace arobench {

/// Mutation probability for the gene window [start, end] (1-based,
/// inclusive): P = 1 / (1 + ln(end - start + 1)).
inline double mutation_probability(int window_start, int window_end) {
    if (window_start < 1 || window_end < window_start)
        throw std::invalid_argument("mutation_probability: need 1 <= start <= end");
    return 1.0 / (1.0 + std::log(static_cast<double>(window_end - window_start + 1)));
}

namespace detail {
template <typename RngT>
double draw_gene(const FeatureBounds& bounds, int i, RngT& rng, bool integer_genes) {
    const auto idx = static_cast<std::size_t>(i);
    double v = rng.uniform(bounds.min[idx], bounds.max[idx]);
    if (integer_genes) v = std::round(v);
    return v;
}
} // namespace detail

/// A fresh parent: every gene uniform within the legitimate-matrix bounds.
template <typename RngT>
FeatureVector random_parent(const FeatureBounds& legal_bounds, RngT& rng,
                            bool integer_genes = false) {
    legal_bounds.validate();
    const int k = legal_bounds.feature_count();
    FeatureVector parent(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        parent[static_cast<std::size_t>(i)] = detail::draw_gene(legal_bounds, i, rng, integer_genes);
    return parent;
}

/// Budded mutation over a fixed window [start, start+length) (0-based):
/// each gene in the window is resampled within its legal range when the
/// draw does not exceed P; genes outside the window copy the parent.
template <typename RngT>
FeatureVector mutate_bud_window(const FeatureVector& parent,
                                const FeatureBounds& legal_bounds,
                                std::size_t start, std::size_t length, RngT& rng,
                                bool integer_genes = false) {
    if (parent.size() != static_cast<std::size_t>(legal_bounds.feature_count()))
        throw std::invalid_argument("mutate_bud: parent width does not match bounds");
    if (length < 1 || start + length > parent.size())
        throw std::invalid_argument("mutate_bud: window out of range");
    const double p = mutation_probability(static_cast<int>(start) + 1,
                                          static_cast<int>(start + length));
    FeatureVector bud = parent;
    for (std::size_t i = start; i < start + length; ++i) {
        if (p >= rng.next_unit())
            bud[i] = detail::draw_gene(legal_bounds, static_cast<int>(i), rng, integer_genes);
    }
    return bud;
}

/// Budded mutation with a random window: start uniform over the genes, end
/// uniform from start to the last gene.
template <typename RngT>
FeatureVector mutate_bud(const FeatureVector& parent, const FeatureBounds& legal_bounds,
                         RngT& rng, bool integer_genes = false) {
    if (parent.empty()) throw std::invalid_argument("mutate_bud: empty parent");
    const std::size_t k = parent.size();
    const std::size_t start = rng.below(k);
    const std::size_t length = 1 + rng.below(k - start);
    return mutate_bud_window(parent, legal_bounds, start, length, rng, integer_genes);
}

/// Which value the freshly created parent is scored with. Difference is the
/// fraud-minus-normal fitness used everywhere else; NormalDistanceOnly scores
/// the first parent by its normal distance alone.
enum class FirstParentScore { Difference, NormalDistanceOnly };

struct AroTrainParams {
    /// Training stops once the parent fitness reaches this value.
    double cut_point = 0.1754;
    /// Safety cap; an unreachable cut point must not loop forever.
    std::int64_t max_loop_iterations = 100000;
    std::uint64_t seed = 0;
    /// Number of independent parents grown; every run appends to the same
    /// identifier matrix.
    int restarts = 1;
    /// Round sampled genes to integers (for datasets with integer fields).
    bool integer_genes = false;
    FirstParentScore first_parent_score = FirstParentScore::Difference;

    void validate() const {
        if (max_loop_iterations < 1)
            throw std::invalid_argument("max_loop_iterations must be >= 1");
        if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
        if (std::isnan(cut_point)) throw std::invalid_argument("cut_point must not be NaN");
    }
};

struct AroTrainOutput {
    DetectorSet set;
    /// Per restart: parent fitness before iterating and after each
    /// iteration. Strictly increases at every replacement event.
    std::vector<std::vector<double>> fitness_traces;
};

/// Grows the identifier matrix: a random parent plus every bud that beat its
/// parent, looping until the parent fitness reaches the cut point (or the
/// cap). The final parent is the last entry of the matrix.
inline AroTrainOutput train_aro_detailed(const Dataset& train_split,
                                         const AroTrainParams& params) {
    params.validate();
    const auto start_time = std::chrono::steady_clock::now();

    auto [legal, fraud] = class_partition(train_split);
    if (fraud.empty())
        throw std::invalid_argument("training split has no fraudulent records");
    Matrix all = legal;
    all.insert(all.end(), fraud.begin(), fraud.end());
    const FeatureBounds bounds_all = compute_bounds(all);
    const FeatureBounds legal_bounds = compute_bounds(legal);
    const FitnessContext ctx(std::move(legal), std::move(fraud), bounds_all);

    AroTrainOutput out;
    DetectorSet& set = out.set;
    set.bounds = bounds_all;
    set.cut_point = params.cut_point;
    set.feature_count = train_split.feature_count();
    set.algorithm = "aro";
    set.stats.final_fitness = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < params.restarts; ++restart) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(restart)));
        FeatureVector parent = random_parent(legal_bounds, rng, params.integer_genes);
        double parent_fitness =
            (params.first_parent_score == FirstParentScore::Difference)
                ? fitness(parent, ctx)
                : normal_distance(parent, ctx);
        set.detectors.push_back(parent);

        std::vector<double> trace{parent_fitness};
        std::int64_t iterations = 0;
        while (parent_fitness < params.cut_point &&
               iterations < params.max_loop_iterations) {
            ++iterations;
            FeatureVector bud = mutate_bud(parent, legal_bounds, rng, params.integer_genes);
            const double bud_fitness = fitness(bud, ctx);
            if (bud_fitness > parent_fitness) {
                parent = bud;
                parent_fitness = bud_fitness;
                set.detectors.push_back(std::move(bud));
                ++set.stats.accepted;
            }
            trace.push_back(parent_fitness);
        }

        set.stats.iterations += iterations;
        set.stats.final_fitness = std::max(set.stats.final_fitness, parent_fitness);
        if (parent_fitness < params.cut_point) set.stats.reached_cut_point = false;
        out.fitness_traces.push_back(std::move(trace));
    }

    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start_time;
    set.stats.train_time_s = elapsed.count();
    return out;
}

inline DetectorSet train_aro(const Dataset& train_split, const AroTrainParams& params) {
    return train_aro_detailed(train_split, params).set;
}

/// Candidate cut points spanning the plausible range, step 0.005.
inline std::vector<double> default_cut_point_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.15 + 0.005 * i);
    return grid;
}

/// Systematic replacement for picking the cut point by trial and error:
/// train with each candidate (under a reduced cap) and keep the candidate
/// with the lowest training-split cost, ties toward the smaller value.
inline double calibrate_cut_point(const Dataset& train_split, AroTrainParams base,
                                  std::vector<double> grid = default_cut_point_grid()) {
    if (grid.empty()) throw std::invalid_argument("calibrate_cut_point: empty grid");
    std::sort(grid.begin(), grid.end());
    base.max_loop_iterations = std::min<std::int64_t>(base.max_loop_iterations, 5000);

    double best_candidate = grid.front();
    double best_cost = std::numeric_limits<double>::infinity();
    for (const double candidate : grid) {
        AroTrainParams params = base;
        params.cut_point = candidate;
        const DetectorSet set = train_aro(train_split, params);
        const auto scored = score_dataset(train_split, set);
        const double c = cost(confusion(scored, candidate));
        if (c < best_cost) {
            best_cost = c;
            best_candidate = candidate;
        }
    }
    return best_candidate;
}

} // namespace arobench
