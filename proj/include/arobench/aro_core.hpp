#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "arobench/rng.hpp"

namespace arobench {

/// Fixed-length bit string; each element is 0 or 1.
using BinaryChromosome = std::vector<std::uint8_t>;

/// Merge probability for a mutated substring of length lambda:
/// P = 1 / (1 + ln(lambda)). Equals 1 at lambda = 1 and decreases
/// monotonically, so long substrings explore while short ones exploit.
inline double merge_probability(std::int64_t lambda) {
    if (lambda < 1) throw std::invalid_argument("merge_probability: lambda must be >= 1");
    return 1.0 / (1.0 + std::log(static_cast<double>(lambda)));
}

/// How larva genes are merged into the bud. Stochastic takes each larva gene
/// independently with probability P; Deterministic takes the whole larva when
/// P exceeds 0.5 and the whole parent otherwise.
enum class MergeRule { Stochastic, Deterministic };

/// Produces a bud from a fixed substring window [start, start+length).
/// The larva is the parent with the window bit-flipped; inside the window
/// each bud gene comes from the larva with probability P (draw < P), outside
/// it always copies the parent.
template <typename RngT>
BinaryChromosome reproduce_bud_window(const BinaryChromosome& parent,
                                      std::size_t start, std::size_t length,
                                      RngT& rng,
                                      MergeRule rule = MergeRule::Stochastic) {
    if (parent.empty()) throw std::invalid_argument("reproduce_bud: empty parent");
    if (length < 1 || start + length > parent.size())
        throw std::invalid_argument("reproduce_bud: window out of range");
    const double p = merge_probability(static_cast<std::int64_t>(length));
    BinaryChromosome bud = parent;
    for (std::size_t i = start; i < start + length; ++i) {
        const bool take_larva = (rule == MergeRule::Deterministic)
                                    ? (p > 0.5)
                                    : (rng.next_unit() < p);
        if (take_larva) bud[i] = static_cast<std::uint8_t>(1 - parent[i]);
    }
    return bud;
}

/// Draws the window, then merges: start uniform over the string, substring
/// length uniform over what still fits.
template <typename RngT>
BinaryChromosome reproduce_bud(const BinaryChromosome& parent, RngT& rng,
                               MergeRule rule = MergeRule::Stochastic) {
    if (parent.empty()) throw std::invalid_argument("reproduce_bud: empty parent");
    const std::size_t n = parent.size();
    const std::size_t start = rng.below(n);
    const std::size_t length = 1 + rng.below(n - start);
    return reproduce_bud_window(parent, start, length, rng, rule);
}

struct AroCoreParams {
    std::int64_t max_iterations = 1000;
    std::uint64_t seed = 0;
    std::function<double(const BinaryChromosome&)> objective;
    /// Length of the random initial chromosome when none is supplied.
    std::size_t chromosome_length = 0;
    /// Optional early exit once the parent reaches this fitness.
    std::optional<double> target_fitness;
    MergeRule merge_rule = MergeRule::Stochastic;

    void validate() const {
        if (max_iterations < 1)
            throw std::invalid_argument("max_iterations must be >= 1");
        if (!objective) throw std::invalid_argument("objective callback is required");
    }
};

struct AroCoreResult {
    BinaryChromosome best;
    double best_fitness = 0;
    std::int64_t iterations_used = 0;
    /// Parent fitness before iterating and after each iteration; never
    /// decreases because only a strictly better bud replaces the parent.
    std::vector<double> fitness_trace;
};

/// Single-individual optimization loop: one parent, one bud per iteration,
/// survival of the strictly fitter.
inline AroCoreResult optimize(const AroCoreParams& params,
                              std::optional<BinaryChromosome> initial = {}) {
    params.validate();
    Rng rng(params.seed);

    BinaryChromosome parent;
    if (initial.has_value()) {
        parent = std::move(*initial);
        if (parent.empty()) throw std::invalid_argument("initial chromosome is empty");
        for (auto bit : parent)
            if (bit > 1) throw std::invalid_argument("chromosome bits must be 0 or 1");
    } else {
        if (params.chromosome_length < 1)
            throw std::invalid_argument("chromosome_length must be >= 1 without an initial chromosome");
        parent.resize(params.chromosome_length);
        for (auto& bit : parent) bit = static_cast<std::uint8_t>(rng.below(2));
    }

    AroCoreResult result;
    double parent_fitness = params.objective(parent);
    result.fitness_trace.push_back(parent_fitness);

    for (std::int64_t it = 0; it < params.max_iterations; ++it) {
        if (params.target_fitness && parent_fitness >= *params.target_fitness) break;
        BinaryChromosome bud = reproduce_bud(parent, rng, params.merge_rule);
        const double bud_fitness = params.objective(bud);
        if (bud_fitness > parent_fitness) {
            parent = std::move(bud);
            parent_fitness = bud_fitness;
        }
        result.fitness_trace.push_back(parent_fitness);
        ++result.iterations_used;
    }

    result.best = std::move(parent);
    result.best_fitness = parent_fitness;
    return result;
}

} // namespace arobench
