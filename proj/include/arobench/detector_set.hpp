#pragma once

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arobench/fitness.hpp"
#include "arobench/io_util.hpp"

namespace arobench {

struct TrainStats {
    std::int64_t iterations = 0;
    std::int64_t accepted = 0;
    double final_fitness = 0;
    /// False when the iteration cap stopped a run before the fitness
    /// threshold was met. Not an error; callers decide what to do with it.
    bool reached_cut_point = true;
    double train_time_s = 0;
};

/// The learned identifier matrix: detector vectors, the normalization bounds
/// used at train time, and the cut point the run was configured with.
struct DetectorSet {
    Matrix detectors;
    FeatureBounds bounds;
    double cut_point = 0;
    int feature_count = 0;
    std::string algorithm;
    TrainStats stats;
};

namespace detail {

inline std::string join_values(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += format_value(values[i]);
    }
    return out;
}

inline std::vector<double> parse_value_row(const std::string& line,
                                           const std::string& where) {
    std::vector<double> row;
    for (const auto& field : split_fields(line)) {
        double v = 0;
        if (!parse_value(field, v))
            throw std::runtime_error(where + ": non-numeric value '" + field + "'");
        row.push_back(v);
    }
    return row;
}

inline long parse_count(const std::string& text, const std::string& where,
                        const std::string& what) {
    try {
        std::size_t used = 0;
        const long value = std::stol(text, &used);
        if (used != text.size() || value < 0) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": invalid " + what + " '" + text + "'");
    }
}

} // namespace detail

inline constexpr int kDetectorFileVersion = 1;

/// Versioned text format: a header with feature count, cut point and
/// bounds, then one detector per line in the CSV number format.
inline std::string detector_set_to_text(const DetectorSet& set) {
    std::string out;
    out += "arobench-detector-set " + std::to_string(kDetectorFileVersion) + "\n";
    out += "algorithm " + set.algorithm + "\n";
    out += "features " + std::to_string(set.feature_count) + "\n";
    out += "cut_point " + format_value(set.cut_point) + "\n";
    out += "bounds_min " + detail::join_values(set.bounds.min) + "\n";
    out += "bounds_max " + detail::join_values(set.bounds.max) + "\n";
    out += "detectors " + std::to_string(set.detectors.size()) + "\n";
    for (const auto& d : set.detectors) out += detail::join_values(d) + "\n";
    return out;
}

inline void save_detectors(const DetectorSet& set, const std::filesystem::path& path) {
    atomic_write_file(path, detector_set_to_text(set));
}

inline DetectorSet load_detectors(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    const std::string where = path.string();
    std::string line;

    auto next_line = [&](const std::string& what) {
        if (!std::getline(in, line))
            throw std::runtime_error(where + ": truncated file, missing " + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto expect_key = [&](const std::string& key) {
        next_line(key);
        if (line.rfind(key + " ", 0) != 0)
            throw std::runtime_error(where + ": expected '" + key + "', got '" + line + "'");
        return line.substr(key.size() + 1);
    };

    next_line("signature");
    if (line != "arobench-detector-set " + std::to_string(kDetectorFileVersion))
        throw std::runtime_error(where + ": not a version-" +
                                 std::to_string(kDetectorFileVersion) +
                                 " detector file: '" + line + "'");

    DetectorSet set;
    set.algorithm = expect_key("algorithm");
    set.feature_count =
        static_cast<int>(detail::parse_count(expect_key("features"), where, "feature count"));
    if (set.feature_count < 1)
        throw std::runtime_error(where + ": invalid feature count");
    if (!parse_value(expect_key("cut_point"), set.cut_point))
        throw std::runtime_error(where + ": invalid cut_point");
    set.bounds.min = detail::parse_value_row(expect_key("bounds_min"), where);
    set.bounds.max = detail::parse_value_row(expect_key("bounds_max"), where);
    if (static_cast<int>(set.bounds.min.size()) != set.feature_count ||
        static_cast<int>(set.bounds.max.size()) != set.feature_count)
        throw std::runtime_error(where + ": bounds length does not match feature count");
    set.bounds.validate();

    const auto count = static_cast<std::size_t>(
        detail::parse_count(expect_key("detectors"), where, "detector count"));
    if (count < 1) throw std::runtime_error(where + ": detector set is empty");
    set.detectors.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto row = detail::parse_value_row(
            next_line("detector " + std::to_string(i + 1)), where);
        if (static_cast<int>(row.size()) != set.feature_count)
            throw std::runtime_error(where + ": detector " + std::to_string(i + 1) +
                                     " has wrong width");
        set.detectors.push_back(row);
    }
    return set;
}

} // namespace arobench
