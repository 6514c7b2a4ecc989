#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace arobench {

struct PairedSamples {
    std::vector<double> a;
    std::vector<double> b;

    void validate() const {
        if (a.empty() || a.size() != b.size())
            throw std::invalid_argument("paired samples must be non-empty and equal length");
    }
};

struct TestResult {
    double statistic = 0;
    std::optional<int> df;
    double p_value = 1;
    /// Wilcoxon direction: rank sums of the positive and negative
    /// differences (a - b).
    double positive_rank_sum = 0;
    double negative_rank_sum = 0;
    /// Exact two-sided p over all sign assignments, when feasible.
    std::optional<double> exact_p_value;
    std::string note;
};

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace detail {

/// Mid-ranks of |values| (1-based ranks, ties averaged). Input must be
/// sorted ascending by magnitude before calling; returns ranks aligned with
/// the sorted order.
inline std::vector<double> midranks_sorted(const std::vector<double>& sorted) {
    std::vector<double> ranks(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t) ranks[t] = mid;
        i = j;
    }
    return ranks;
}

/// Distribution of the positive-rank sum over all 2^n sign assignments,
/// computed on 2x-scaled ranks so that mid-ranks stay integral. counts[s]
/// is the number of assignments with scaled sum s; the total is 2^n, exact
/// in double for n <= 20.
inline std::vector<double> signed_rank_sum_counts(const std::vector<double>& ranks) {
    std::int64_t total2 = 0;
    std::vector<std::int64_t> scaled;
    scaled.reserve(ranks.size());
    for (double r : ranks) {
        const auto s = static_cast<std::int64_t>(std::llround(2.0 * r));
        scaled.push_back(s);
        total2 += s;
    }
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    std::int64_t reach = 0;
    for (const std::int64_t s : scaled) {
        for (std::int64_t v = reach; v >= 0; --v) {
            if (counts[static_cast<std::size_t>(v)] > 0)
                counts[static_cast<std::size_t>(v + s)] +=
                    counts[static_cast<std::size_t>(v)];
        }
        reach += s;
    }
    return counts;
}

} // namespace detail

/// Paired two-sided Wilcoxon signed-rank test of a vs b. Zero differences
/// are dropped; |differences| are ranked with mid-ranks. The asymptotic p
/// uses the normal approximation of W = min(W+, W-) without continuity
/// correction. For n' <= 20 the exact two-sided p (both tails of the
/// sign-assignment distribution) is also returned.
inline TestResult wilcoxon_signed_rank(const PairedSamples& pairs) {
    pairs.validate();
    std::vector<double> diffs;
    for (std::size_t i = 0; i < pairs.a.size(); ++i) {
        const double d = pairs.a[i] - pairs.b[i];
        if (!std::isfinite(d))
            throw std::invalid_argument("wilcoxon: non-finite difference");
        if (d != 0) diffs.push_back(d);
    }
    if (diffs.empty())
        throw std::invalid_argument("wilcoxon: all differences are zero");

    std::sort(diffs.begin(), diffs.end(), [](double x, double y) {
        return std::abs(x) < std::abs(y);
    });
    std::vector<double> magnitudes;
    magnitudes.reserve(diffs.size());
    for (double d : diffs) magnitudes.push_back(std::abs(d));
    const std::vector<double> ranks = detail::midranks_sorted(magnitudes);

    TestResult result;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0)
            result.positive_rank_sum += ranks[i];
        else
            result.negative_rank_sum += ranks[i];
    }
    const auto n = static_cast<double>(diffs.size());
    const double w = std::min(result.positive_rank_sum, result.negative_rank_sum);
    result.statistic = w;

    const double mean = n * (n + 1.0) / 4.0;
    const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    const double z = (w - mean) / std::sqrt(variance);
    result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
    result.note = "asymptotic p from the normal approximation, no continuity correction";

    if (diffs.size() <= 20) {
        const std::vector<double> counts = detail::signed_rank_sum_counts(ranks);
        const auto w2 = static_cast<std::int64_t>(std::llround(2.0 * w));
        const auto total2 = static_cast<std::int64_t>(counts.size()) - 1;
        double tail_low = 0;
        double tail_high = 0;
        double assignments = 0;
        for (std::int64_t s = 0; s <= total2; ++s) {
            const double c = counts[static_cast<std::size_t>(s)];
            assignments += c;
            if (s <= w2) tail_low += c;
            if (s >= total2 - w2) tail_high += c;
        }
        result.exact_p_value = std::min(1.0, (tail_low + tail_high) / assignments);
    }
    return result;
}

/// Regularized upper incomplete gamma Q(a, x), via the series for the lower
/// function when x < a + 1 and the Lentz continued fraction otherwise.
inline double regularized_gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("regularized_gamma_q: bad arguments");
    if (x == 0) return 1.0;
    const double log_gamma_a = std::lgamma(a);
    if (x < a + 1.0) {
        // lower series: P(a,x) = e^{-x} x^a / Gamma(a) * sum x^n / (a)_{n+1}
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - log_gamma_a);
        return 1.0 - p;
    }
    // continued fraction for Q(a,x), modified Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma_a) * h;
}

/// Upper-tail probability of the chi-square distribution.
inline double chi_square_sf(double x, int df) {
    if (df < 1) throw std::invalid_argument("chi_square_sf: df must be >= 1");
    if (x < 0) throw std::invalid_argument("chi_square_sf: x must be >= 0");
    return regularized_gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

/// Kruskal-Wallis rank test across groups, with mid-ranks and the standard
/// tie correction; p from the chi-square upper tail with g - 1 degrees of
/// freedom. When every observation is identical the statistic is 0 and
/// p = 1 by convention. When every group is a singleton the statistic is
/// forced to g - 1 whatever the data; the result carries a warning note.
inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2)
        throw std::invalid_argument("kruskal_wallis: need at least two groups");
    struct Tagged {
        double value;
        std::size_t group;
    };
    std::vector<Tagged> pooled;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty())
            throw std::invalid_argument("kruskal_wallis: empty group");
        for (double v : groups[g]) {
            if (!std::isfinite(v))
                throw std::invalid_argument("kruskal_wallis: non-finite observation");
            pooled.push_back({v, g});
        }
    }
    const auto total = static_cast<double>(pooled.size());
    if (pooled.size() < 2)
        throw std::invalid_argument("kruskal_wallis: need at least two observations");

    std::sort(pooled.begin(), pooled.end(),
              [](const Tagged& x, const Tagged& y) { return x.value < y.value; });
    std::vector<double> values;
    values.reserve(pooled.size());
    for (const auto& t : pooled) values.push_back(t.value);
    const std::vector<double> ranks = detail::midranks_sorted(values);

    std::vector<double> rank_sums(groups.size(), 0.0);
    for (std::size_t i = 0; i < pooled.size(); ++i)
        rank_sums[pooled[i].group] += ranks[i];

    double sum_sq_over_n = 0;
    for (std::size_t g = 0; g < groups.size(); ++g)
        sum_sq_over_n += rank_sums[g] * rank_sums[g] / static_cast<double>(groups[g].size());
    double h = 12.0 * sum_sq_over_n / (total * (total + 1.0)) - 3.0 * (total + 1.0);

    // tie correction: divide by 1 - sum(t^3 - t) / (N^3 - N)
    double tie_sum = 0;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        const auto t = static_cast<double>(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }
    TestResult result;
    result.df = static_cast<int>(groups.size()) - 1;
    const double correction = 1.0 - tie_sum / (total * total * total - total);
    if (correction <= 0) {
        result.statistic = 0;
        result.p_value = 1.0;
        result.note = "all observations identical; statistic 0 and p 1 by convention";
        return result;
    }
    h /= correction;
    if (h < 0 && h > -1e-12) h = 0;

    result.statistic = h;
    result.p_value = chi_square_sf(h, *result.df);
    const bool all_singletons =
        std::all_of(groups.begin(), groups.end(),
                    [](const std::vector<double>& g) { return g.size() == 1; });
    if (all_singletons)
        result.note =
            "every group has a single observation; the statistic equals g-1 "
            "regardless of the data and the test is non-informative";
    return result;
}

} // namespace arobench
