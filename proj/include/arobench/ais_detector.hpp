#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "arobench/detector_set.hpp"
#include "arobench/fitness.hpp"
#include "arobench/rng.hpp"

namespace arobench {

/// Clonal-selection baseline parameters. The population/clone/memory sizes
/// and the 150-iteration budget are the conventional settings for this
/// problem; clone_factor and mutation_rate shape the colony expansion, which
/// the algorithm sketch leaves open.
struct AisParams {
    int n_pop = 25;
    int n_c = 7;
    int n_m = 5;
    std::int64_t iterations = 150;
    double clone_factor = 1.0;
    double mutation_rate = 0.1;
    std::uint64_t seed = 0;
    /// Stored in the resulting DetectorSet as the test-phase threshold;
    /// AIS training itself does not use it.
    double cut_point = 0.1754;
    /// Replace the worst memory cells unconditionally, as the algorithm
    /// sketch literally states. Off by default: the guarded variant only
    /// installs a candidate that beats the cell it replaces, so the worst
    /// memory affinity never regresses.
    bool faithful_replacement = false;
    /// Optional negative-selection pre-filter: discard sampled detectors
    /// whose fitness is negative (they look more fraudulent than normal).
    bool negative_selection = false;

    void validate() const {
        if (n_pop < 1 || n_c < 1 || n_m < 1)
            throw std::invalid_argument("n_pop, n_c, n_m must be >= 1");
        if (!(n_m <= n_c && n_c <= n_pop))
            throw std::invalid_argument("need n_m <= n_c <= n_pop");
        if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
        if (!(clone_factor > 0)) throw std::invalid_argument("clone_factor must be > 0");
        if (!(mutation_rate >= 0 && mutation_rate <= 1))
            throw std::invalid_argument("mutation_rate must be in [0, 1]");
    }
};

/// Detector quality for clonal selection; identical to the shared
/// fraud-minus-normal fitness.
inline double affinity(const FeatureVector& record, const FitnessContext& ctx) {
    return fitness(record, ctx);
}

/// Clone count for the detector at affinity rank `rank` (1-based):
/// round(clone_factor * n_c / rank), at least 1.
inline std::int64_t clone_count(int n_c, double clone_factor, int rank) {
    if (rank < 1) throw std::invalid_argument("clone_count: rank must be >= 1");
    return std::max<std::int64_t>(
        1, std::llround(clone_factor * static_cast<double>(n_c) /
                        static_cast<double>(rank)));
}

struct MemoryCell {
    FeatureVector features;
    double affinity = 0;
};

namespace detail {
inline void sort_by_affinity_desc(std::vector<MemoryCell>& cells) {
    std::stable_sort(cells.begin(), cells.end(),
                     [](const MemoryCell& a, const MemoryCell& b) {
                         return a.affinity > b.affinity;
                     });
}
} // namespace detail

/// Fixed-capacity pool of detector cells, kept sorted by affinity (best
/// first) after every update.
class MemoryCellPool {
public:
    MemoryCellPool(std::vector<MemoryCell> cells, std::size_t capacity)
        : cells_(std::move(cells)), capacity_(capacity) {
        if (capacity_ < 1)
            throw std::invalid_argument("MemoryCellPool: capacity must be >= 1");
        if (cells_.empty())
            throw std::invalid_argument("MemoryCellPool: empty initial pool");
        if (cells_.size() > capacity_)
            throw std::invalid_argument("MemoryCellPool: more cells than capacity");
        detail::sort_by_affinity_desc(cells_);
    }

    const std::vector<MemoryCell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    std::size_t capacity() const { return capacity_; }
    double best_affinity() const { return cells_.front().affinity; }
    double worst_affinity() const { return cells_.back().affinity; }

    /// The best candidates challenge the worst cells, best against worst
    /// first. A guarded challenge installs the candidate only when it beats
    /// the cell it replaces, so the worst affinity never regresses; the
    /// unconditional variant always installs. Returns the replacement count.
    std::int64_t replace_worst(std::vector<MemoryCell> candidates,
                               bool unconditional = false) {
        detail::sort_by_affinity_desc(candidates);
        const std::size_t challengers = std::min(candidates.size(), cells_.size());
        std::int64_t replacements = 0;
        for (std::size_t j = 0; j < challengers; ++j) {
            MemoryCell& cell = cells_[cells_.size() - 1 - j];
            MemoryCell& candidate = candidates[j];
            if (unconditional || candidate.affinity > cell.affinity) {
                cell = std::move(candidate);
                ++replacements;
            }
        }
        detail::sort_by_affinity_desc(cells_);
        return replacements;
    }

private:
    std::vector<MemoryCell> cells_;
    std::size_t capacity_ = 0;
};

struct AisTrainOutput {
    DetectorSet set;
    /// Worst memory-cell affinity after the initial sample and after each
    /// iteration. Non-decreasing unless faithful_replacement is on.
    std::vector<double> worst_affinity_trace;
};

/// Clonal selection over sampled normal records: per iteration, sample
/// n_pop normals, keep the n_c best by affinity, expand and mutate a colony,
/// then let the n_m best mutants challenge the n_m worst memory cells.
/// The memory pool (capacity n_pop) becomes the detector set.
inline AisTrainOutput train_ais_detailed(const Dataset& train_split,
                                         const AisParams& params) {
    params.validate();
    const auto start_time = std::chrono::steady_clock::now();

    auto [legal, fraud] = class_partition(train_split);
    if (fraud.empty())
        throw std::invalid_argument("training split has no fraudulent records");
    if (legal.size() < static_cast<std::size_t>(params.n_pop))
        throw std::invalid_argument(
            "training split has " + std::to_string(legal.size()) +
            " normal records, fewer than n_pop = " + std::to_string(params.n_pop));
    Matrix all = legal;
    all.insert(all.end(), fraud.begin(), fraud.end());
    const FeatureBounds bounds_all = compute_bounds(all);
    const FeatureBounds legal_bounds = compute_bounds(legal);
    const FitnessContext ctx(legal, std::move(fraud), bounds_all);

    Rng rng(params.seed);
    std::vector<std::size_t> indices(legal.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});

    // Partial Fisher-Yates: after the call, indices[0 .. n_pop) are a
    // uniform sample without replacement.
    auto sample_normals = [&]() {
        std::vector<MemoryCell> sample;
        sample.reserve(static_cast<std::size_t>(params.n_pop));
        for (int j = 0; j < params.n_pop; ++j) {
            const auto pick = static_cast<std::size_t>(j) +
                              rng.below(indices.size() - static_cast<std::size_t>(j));
            std::swap(indices[static_cast<std::size_t>(j)], indices[pick]);
            const auto& row = legal[indices[static_cast<std::size_t>(j)]];
            sample.push_back({row, affinity(row, ctx)});
        }
        if (params.negative_selection) {
            std::erase_if(sample,
                          [](const MemoryCell& c) { return c.affinity < 0; });
        }
        detail::sort_by_affinity_desc(sample);
        return sample;
    };

    AisTrainOutput out;
    std::vector<MemoryCell> initial = sample_normals();
    if (initial.empty())
        throw std::invalid_argument(
            "negative selection discarded the entire initial sample");
    MemoryCellPool memory(std::move(initial),
                          static_cast<std::size_t>(params.n_pop));
    out.worst_affinity_trace.push_back(memory.worst_affinity());

    std::int64_t replacements = 0;
    for (std::int64_t it = 0; it < params.iterations; ++it) {
        std::vector<MemoryCell> first_pop = sample_normals();
        if (first_pop.empty()) {
            out.worst_affinity_trace.push_back(memory.worst_affinity());
            continue;
        }
        const int best_count = std::min<int>(params.n_c, static_cast<int>(first_pop.size()));

        std::vector<MemoryCell> colony;
        for (int rank = 1; rank <= best_count; ++rank) {
            const auto& source = first_pop[static_cast<std::size_t>(rank - 1)];
            const std::int64_t copies = clone_count(params.n_c, params.clone_factor, rank);
            for (std::int64_t c = 0; c < copies; ++c) {
                FeatureVector clone = source.features;
                for (std::size_t g = 0; g < clone.size(); ++g) {
                    if (rng.next_unit() < params.mutation_rate)
                        clone[g] = rng.uniform(legal_bounds.min[g], legal_bounds.max[g]);
                }
                colony.push_back({std::move(clone), 0.0});
            }
        }
        for (auto& cell : colony) cell.affinity = affinity(cell.features, ctx);
        detail::sort_by_affinity_desc(colony);
        if (colony.size() > static_cast<std::size_t>(params.n_m))
            colony.resize(static_cast<std::size_t>(params.n_m));

        replacements += memory.replace_worst(std::move(colony),
                                             params.faithful_replacement);
        out.worst_affinity_trace.push_back(memory.worst_affinity());
    }

    DetectorSet& set = out.set;
    set.bounds = bounds_all;
    set.cut_point = params.cut_point;
    set.feature_count = train_split.feature_count();
    set.algorithm = "ais";
    set.stats.iterations = params.iterations;
    set.stats.accepted = replacements;
    set.stats.final_fitness = memory.best_affinity();
    set.stats.reached_cut_point = true;
    for (const auto& cell : memory.cells()) set.detectors.push_back(cell.features);

    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start_time;
    set.stats.train_time_s = elapsed.count();
    return out;
}

inline DetectorSet train_ais(const Dataset& train_split, const AisParams& params) {
    return train_ais_detailed(train_split, params).set;
}

} // namespace arobench
