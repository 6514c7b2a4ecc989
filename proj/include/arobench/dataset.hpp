#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arobench/io_util.hpp"
#include "arobench/rng.hpp"

namespace arobench {

enum class Label : std::uint8_t { Legitimate = 0, Fraudulent = 1 };

using FeatureVector = std::vector<double>;
using Matrix = std::vector<FeatureVector>;

struct TransactionRecord {
    FeatureVector features;
    Label label = Label::Legitimate;

    bool operator==(const TransactionRecord&) const = default;
};

/// An immutable labeled table of transactions. Construction validates the
/// shape: at least one record, a fixed feature count k >= 1, finite values,
/// and at least one legitimate record (detector training samples from the
/// legitimate class).
class Dataset {
public:
    explicit Dataset(std::vector<TransactionRecord> records)
        : records_(std::move(records)) {
        if (records_.empty())
            throw std::invalid_argument("dataset must contain at least one record");
        feature_count_ = static_cast<int>(records_.front().features.size());
        if (feature_count_ < 1)
            throw std::invalid_argument("records must have at least one feature");
        bool any_legit = false;
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const auto& r = records_[i];
            if (static_cast<int>(r.features.size()) != feature_count_)
                throw std::invalid_argument(
                    "record " + std::to_string(i + 1) + " has " +
                    std::to_string(r.features.size()) + " features, expected " +
                    std::to_string(feature_count_));
            for (double v : r.features)
                if (!std::isfinite(v))
                    throw std::invalid_argument(
                        "record " + std::to_string(i + 1) + " has a non-finite feature");
            any_legit |= (r.label == Label::Legitimate);
        }
        if (!any_legit)
            throw std::invalid_argument("dataset must contain at least one legitimate record");
    }

    const std::vector<TransactionRecord>& records() const { return records_; }
    int feature_count() const { return feature_count_; }
    std::size_t size() const { return records_.size(); }

    std::size_t count(Label label) const {
        return static_cast<std::size_t>(
            std::count_if(records_.begin(), records_.end(),
                          [label](const TransactionRecord& r) { return r.label == label; }));
    }

    bool operator==(const Dataset&) const = default;

private:
    std::vector<TransactionRecord> records_;
    int feature_count_ = 0;
};

/// One train/test partition of a transaction corpus.
struct SplitPair {
    Dataset train;
    Dataset test;
    int split_id = 0;
};

/// Synthetic imbalanced-transaction generator settings. The default counts
/// mirror a ~29k/12.7k train/test split with a 3.74% fraud fraction.
/// Classes are two boxes: per feature, legitimate values are uniform around
/// a base center and fraudulent values around a center displaced by
/// class_separation * noise_scale (sign alternating by feature), both with
/// additive uniform noise in [-noise_scale, +noise_scale). A separation of
/// 2 noise units therefore makes the class supports just disjoint.
struct GeneratorConfig {
    int feature_count = 17;
    std::size_t train_legit = 27904;
    std::size_t train_fraud = 1084;
    std::size_t test_legit = 12184;
    std::size_t test_fraud = 475;
    double class_separation = 3.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (feature_count < 1) throw std::invalid_argument("feature_count must be >= 1");
        if (train_legit < 1 || train_fraud < 1 || test_legit < 1 || test_fraud < 1)
            throw std::invalid_argument("all class counts must be >= 1");
        if (!(class_separation >= 0)) throw std::invalid_argument("class_separation must be >= 0");
        if (!(noise_scale > 0)) throw std::invalid_argument("noise_scale must be > 0");
    }

    double train_fraud_fraction() const {
        return static_cast<double>(train_fraud) /
               static_cast<double>(train_fraud + train_legit);
    }
};

/// Column mapping for CSV ingestion. Features are every non-label column,
/// in file order.
struct CsvSchema {
    std::string label_column = "label";
    std::map<std::string, Label> label_values = {
        {"0", Label::Legitimate},
        {"1", Label::Fraudulent},
    };
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace detail

/// Parses a CSV file (header row first) into a Dataset. Errors carry the
/// 1-based file row number.
inline Dataset load_csv(const std::filesystem::path& path,
                        const CsvSchema& schema = {}) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path.string() + ": file is empty");

    const std::vector<std::string> header = detail::split_fields(line);
    int label_index = -1;
    std::vector<int> feature_indices;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (header[i] == schema.label_column)
            label_index = i;
        else
            feature_indices.push_back(i);
    }
    if (label_index < 0)
        throw std::runtime_error(path.string() + ": no '" + schema.label_column +
                                 "' column in header");
    if (feature_indices.empty())
        throw std::runtime_error(path.string() + ": no feature columns in header");

    std::vector<TransactionRecord> records;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = detail::split_fields(line);
        if (fields.size() != header.size())
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     ": expected " + std::to_string(header.size()) +
                                     " columns, found " + std::to_string(fields.size()));
        TransactionRecord rec;
        rec.features.reserve(feature_indices.size());
        for (int fi : feature_indices) {
            double v = 0;
            if (!parse_value(fields[fi], v) || !std::isfinite(v))
                throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                         ": non-numeric value '" + fields[fi] +
                                         "' in column '" + header[fi] + "'");
            rec.features.push_back(v);
        }
        const auto it = schema.label_values.find(fields[label_index]);
        if (it == schema.label_values.end())
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     ": unknown label value '" + fields[label_index] + "'");
        rec.label = it->second;
        records.push_back(std::move(rec));
    }
    return Dataset(std::move(records));
}

/// Serializes a Dataset into the CSV wire format: header "f1,...,fk,label",
/// one record per row, features as 9-significant-digit decimal text.
inline std::string to_csv(const Dataset& dataset) {
    std::string out;
    out.reserve(dataset.size() * (static_cast<std::size_t>(dataset.feature_count()) * 12 + 4));
    for (int i = 1; i <= dataset.feature_count(); ++i) {
        out += 'f';
        out += std::to_string(i);
        out += ',';
    }
    out += "label\n";
    for (const auto& rec : dataset.records()) {
        for (double v : rec.features) {
            out += format_value(v);
            out += ',';
        }
        out += (rec.label == Label::Fraudulent) ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    atomic_write_file(path, to_csv(dataset));
}

/// Draws one synthetic split. Values are quantized to the CSV serialization
/// precision at creation, so the in-memory dataset and its file image are
/// interchangeable.
inline SplitPair generate_split(const GeneratorConfig& config, int split_id) {
    config.validate();
    if (split_id < 1) throw std::invalid_argument("split_id must be >= 1");
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(split_id)));

    const int k = config.feature_count;
    auto fraud_center = [&](int feature) {
        const double sign = (feature % 2 == 0) ? 1.0 : -1.0;
        return sign * config.class_separation * config.noise_scale;
    };
    auto draw = [&](Label label) {
        TransactionRecord rec;
        rec.label = label;
        rec.features.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            const double center = (label == Label::Fraudulent) ? fraud_center(i) : 0.0;
            rec.features[static_cast<std::size_t>(i)] = quantize_value(
                rng.uniform(center - config.noise_scale, center + config.noise_scale));
        }
        return rec;
    };

    std::vector<TransactionRecord> train;
    train.reserve(config.train_legit + config.train_fraud);
    for (std::size_t i = 0; i < config.train_legit; ++i) train.push_back(draw(Label::Legitimate));
    for (std::size_t i = 0; i < config.train_fraud; ++i) train.push_back(draw(Label::Fraudulent));

    std::vector<TransactionRecord> test;
    test.reserve(config.test_legit + config.test_fraud);
    for (std::size_t i = 0; i < config.test_legit; ++i) test.push_back(draw(Label::Legitimate));
    for (std::size_t i = 0; i < config.test_fraud; ++i) test.push_back(draw(Label::Fraudulent));

    return SplitPair{Dataset(std::move(train)), Dataset(std::move(test)), split_id};
}

/// Draws num_splits independent splits; split i depends only on
/// (config.seed, i), never on the other splits.
inline std::vector<SplitPair> generate_splits(const GeneratorConfig& config,
                                              int num_splits) {
    if (num_splits < 1) throw std::invalid_argument("num_splits must be >= 1");
    std::vector<SplitPair> splits;
    splits.reserve(static_cast<std::size_t>(num_splits));
    for (int id = 1; id <= num_splits; ++id) splits.push_back(generate_split(config, id));
    return splits;
}

/// Order-preserving partition into (legitimate rows, fraudulent rows).
inline std::pair<Matrix, Matrix> class_partition(const Dataset& dataset) {
    Matrix legal;
    Matrix fraud;
    for (const auto& rec : dataset.records()) {
        if (rec.label == Label::Legitimate)
            legal.push_back(rec.features);
        else
            fraud.push_back(rec.features);
    }
    return {std::move(legal), std::move(fraud)};
}

} // namespace arobench
