#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arobench/dataset.hpp"

namespace arobench {

/// Per-feature normalization ranges (componentwise max/min over a row set).
/// A degenerate feature (max == min) carries no information; its normalized
/// distance term is defined as 0 rather than a division by zero.
struct FeatureBounds {
    std::vector<double> min;
    std::vector<double> max;

    int feature_count() const { return static_cast<int>(min.size()); }
    bool degenerate(int i) const {
        return !(max[static_cast<std::size_t>(i)] > min[static_cast<std::size_t>(i)]);
    }
    double range(int i) const {
        return max[static_cast<std::size_t>(i)] - min[static_cast<std::size_t>(i)];
    }

    void validate() const {
        if (min.empty() || min.size() != max.size())
            throw std::invalid_argument("bounds must have matching, non-empty min/max");
        for (std::size_t i = 0; i < min.size(); ++i) {
            if (!std::isfinite(min[i]) || !std::isfinite(max[i]) || max[i] < min[i])
                throw std::invalid_argument("bounds must be finite with max >= min");
        }
    }

    bool operator==(const FeatureBounds&) const = default;
};

inline FeatureBounds compute_bounds(const Matrix& rows) {
    if (rows.empty()) throw std::invalid_argument("compute_bounds: empty row set");
    const std::size_t k = rows.front().size();
    FeatureBounds b{rows.front(), rows.front()};
    for (const auto& row : rows) {
        if (row.size() != k)
            throw std::invalid_argument("compute_bounds: ragged row set");
        for (std::size_t i = 0; i < k; ++i) {
            b.min[i] = std::min(b.min[i], row[i]);
            b.max[i] = std::max(b.max[i], row[i]);
        }
    }
    return b;
}

/// Mean normalized absolute deviation of a record from a fixed row set:
///
///   sum_i sum_j |r_i - row_ji| / (max_i - min_i)   divided by   k * n
///
/// Evaluation uses per-feature sorted columns with prefix sums, so one query
/// costs O(k log n) instead of O(k n). Prefix sums accumulate in long double;
/// the result matches the naive feature-major/row-minor double-loop sum to
/// well within 1e-12 relative error.
class DistanceKernel {
public:
    DistanceKernel() = default;

    DistanceKernel(const Matrix& rows, FeatureBounds bounds)
        : bounds_(std::move(bounds)), rows_(rows.size()) {
        bounds_.validate();
        if (rows.empty()) throw std::invalid_argument("DistanceKernel: empty row set");
        const auto k = static_cast<std::size_t>(bounds_.feature_count());
        sorted_.assign(k, {});
        prefix_.assign(k, {});
        for (std::size_t i = 0; i < k; ++i) {
            auto& column = sorted_[i];
            column.resize(rows_);
            for (std::size_t j = 0; j < rows_; ++j) {
                if (rows[j].size() != k)
                    throw std::invalid_argument("DistanceKernel: ragged row set");
                column[j] = rows[j][i];
            }
            std::sort(column.begin(), column.end());
            auto& pre = prefix_[i];
            pre.resize(rows_ + 1);
            pre[0] = 0.0L;
            for (std::size_t j = 0; j < rows_; ++j)
                pre[j + 1] = pre[j] + static_cast<long double>(column[j]);
        }
    }

    std::size_t row_count() const { return rows_; }
    int feature_count() const { return bounds_.feature_count(); }
    const FeatureBounds& bounds() const { return bounds_; }

    double mean_abs_distance(const FeatureVector& record) const {
        const auto k = static_cast<std::size_t>(bounds_.feature_count());
        if (record.size() != k)
            throw std::invalid_argument(
                "record has " + std::to_string(record.size()) +
                " features, kernel expects " + std::to_string(k));
        long double total = 0.0L;
        for (std::size_t i = 0; i < k; ++i) {
            if (bounds_.degenerate(static_cast<int>(i))) continue;
            const auto& column = sorted_[i];
            const auto& pre = prefix_[i];
            const long double r = record[i];
            const auto idx = static_cast<std::size_t>(
                std::lower_bound(column.begin(), column.end(), record[i]) -
                column.begin());
            // sum of (r - v) over v < r, plus sum of (v - r) over v >= r
            const long double below = r * static_cast<long double>(idx) - pre[idx];
            const long double above = (pre[rows_] - pre[idx]) -
                                      r * static_cast<long double>(rows_ - idx);
            total += (below + above) /
                     static_cast<long double>(bounds_.range(static_cast<int>(i)));
        }
        return static_cast<double>(
            total / (static_cast<long double>(k) * static_cast<long double>(rows_)));
    }

private:
    FeatureBounds bounds_;
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> sorted_;
    std::vector<std::vector<long double>> prefix_;
};

/// Immutable evaluation context: the legitimate and fraudulent training
/// matrices plus the normalization bounds shared by every distance.
/// The fraud matrix may be empty, in which case only the normal distance
/// is defined.
class FitnessContext {
public:
    FitnessContext(Matrix normal, Matrix fraud, FeatureBounds bounds)
        : normal_(std::move(normal)), fraud_(std::move(fraud)), bounds_(std::move(bounds)) {
        bounds_.validate();
        if (normal_.empty())
            throw std::invalid_argument("FitnessContext: empty normal matrix");
        normal_kernel_ = DistanceKernel(normal_, bounds_);
        if (!fraud_.empty()) fraud_kernel_ = DistanceKernel(fraud_, bounds_);
    }

    /// Builds the context for a training split: class partition plus
    /// normalization bounds over the full split (both classes).
    static FitnessContext from_dataset(const Dataset& dataset) {
        auto [legal, fraud] = class_partition(dataset);
        Matrix all = legal;
        all.insert(all.end(), fraud.begin(), fraud.end());
        return FitnessContext(std::move(legal), std::move(fraud), compute_bounds(all));
    }

    const Matrix& normal_matrix() const { return normal_; }
    const Matrix& fraud_matrix() const { return fraud_; }
    const FeatureBounds& bounds() const { return bounds_; }
    int feature_count() const { return bounds_.feature_count(); }
    std::size_t normal_count() const { return normal_.size(); }
    std::size_t fraud_count() const { return fraud_.size(); }

    const DistanceKernel& normal_kernel() const { return normal_kernel_; }
    const DistanceKernel& fraud_kernel() const {
        if (fraud_.empty())
            throw std::invalid_argument("FitnessContext: empty fraud matrix");
        return fraud_kernel_;
    }

private:
    Matrix normal_;
    Matrix fraud_;
    FeatureBounds bounds_;
    DistanceKernel normal_kernel_;
    DistanceKernel fraud_kernel_;
};

/// Normalized mean absolute distance of a record to the normal matrix.
inline double normal_distance(const FeatureVector& record, const FitnessContext& ctx) {
    return ctx.normal_kernel().mean_abs_distance(record);
}

/// Normalized mean absolute distance of a record to the fraud matrix.
inline double fraud_distance(const FeatureVector& record, const FitnessContext& ctx) {
    return ctx.fraud_kernel().mean_abs_distance(record);
}

/// The "bud fit": fraud distance minus normal distance. Positive values
/// mean the record sits closer to the normal transactions, so higher is
/// better for a normal-class detector.
inline double fitness(const FeatureVector& record, const FitnessContext& ctx) {
    return fraud_distance(record, ctx) - normal_distance(record, ctx);
}

} // namespace arobench
