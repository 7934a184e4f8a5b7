// Copyright 2026 The apsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "apsel/csv.hpp"
#include "apsel/error.hpp"
#include "apsel/matrix.hpp"
#include "apsel/rng.hpp"
#include "apsel/selection.hpp"

namespace apsel {

using FloorLabel = int;

/// Column layout of a fingerprint CSV.
struct Schema {
    /// RSS columns are the header names starting with this prefix...
    std::string rss_prefix = "WAP";
    /// ...unless an inclusive zero-based column index range is given.
    std::optional<std::pair<std::size_t, std::size_t>> rss_columns;
    std::string floor_column = "FLOOR";
    double sentinel = 100.0;
    double rss_min = -104.0;
    double rss_max = 0.0;
};

/// m x n RSS fingerprint with one floor label per sample.
///
/// Invariants (checked on construction): rss is m x n; ap ids are unique;
/// at least two distinct floors; every non-sentinel value lies within
/// [rss_min, rss_max].
class FingerprintDataset {
  public:
    FingerprintDataset(Matrix<double> rss, std::vector<FloorLabel> floors,
                       std::vector<std::string> ap_ids, double sentinel, double rss_min,
                       double rss_max)
        : rss_(std::move(rss)),
          floors_(std::move(floors)),
          ap_ids_(std::move(ap_ids)),
          sentinel_(sentinel),
          rss_min_(rss_min),
          rss_max_(rss_max) {
        validate();
    }

    std::size_t samples() const noexcept { return rss_.rows(); }
    std::size_t aps() const noexcept { return rss_.cols(); }
    const Matrix<double>& rss() const noexcept { return rss_; }
    const std::vector<FloorLabel>& floors() const noexcept { return floors_; }
    const std::vector<std::string>& ap_ids() const noexcept { return ap_ids_; }
    double sentinel() const noexcept { return sentinel_; }
    double rss_min() const noexcept { return rss_min_; }
    double rss_max() const noexcept { return rss_max_; }

    /// Sorted distinct floor labels.
    const std::vector<FloorLabel>& floor_labels() const noexcept { return labels_; }
    std::size_t floor_count() const noexcept { return labels_.size(); }

    bool is_sentinel(double v) const noexcept { return v == sentinel_; }

    /// Value used wherever RSS enters arithmetic: not-detected reads as
    /// one unit below the weakest representable signal.
    double missing_value() const noexcept { return rss_min_ - 1.0; }

    double substituted(std::size_t row, std::size_t col) const {
        const double v = rss_(row, col);
        return is_sentinel(v) ? missing_value() : v;
    }

    std::vector<double> substituted_column(std::size_t col) const {
        std::vector<double> out(samples());
        for (std::size_t r = 0; r < samples(); ++r) out[r] = substituted(r, col);
        return out;
    }

    /// Row-major copy of the RSS matrix with sentinels substituted.
    Matrix<double> substituted_matrix() const {
        Matrix<double> out(samples(), aps());
        for (std::size_t r = 0; r < samples(); ++r)
            for (std::size_t c = 0; c < aps(); ++c) out(r, c) = substituted(r, c);
        return out;
    }

    friend bool operator==(const FingerprintDataset& a, const FingerprintDataset& b) {
        return a.rss_ == b.rss_ && a.floors_ == b.floors_ && a.ap_ids_ == b.ap_ids_ &&
               a.sentinel_ == b.sentinel_ && a.rss_min_ == b.rss_min_ && a.rss_max_ == b.rss_max_;
    }

  private:
    void validate() {
        if (!(rss_min_ < rss_max_)) throw DataError("rss range requires rss_min < rss_max");
        if (floors_.size() != rss_.rows())
            throw DataError("floor label count " + std::to_string(floors_.size()) +
                            " does not match sample count " + std::to_string(rss_.rows()));
        if (ap_ids_.size() != rss_.cols())
            throw DataError("ap id count " + std::to_string(ap_ids_.size()) +
                            " does not match column count " + std::to_string(rss_.cols()));
        std::unordered_set<std::string> seen;
        for (const auto& id : ap_ids_)
            if (!seen.insert(id).second) throw DataError("duplicate ap id '" + id + "'");
        std::set<FloorLabel> distinct(floors_.begin(), floors_.end());
        labels_.assign(distinct.begin(), distinct.end());
        if (labels_.size() < 2)
            throw DataError("dataset needs at least 2 distinct floor labels, found " +
                            std::to_string(labels_.size()));
        for (std::size_t r = 0; r < rss_.rows(); ++r) {
            for (std::size_t c = 0; c < rss_.cols(); ++c) {
                const double v = rss_(r, c);
                if (is_sentinel(v)) continue;
                if (!(v >= rss_min_ && v <= rss_max_))
                    throw DataError("row " + std::to_string(r) + ", column '" + ap_ids_[c] +
                                    "': value " + csv::format_number(v) +
                                    " outside rss range");
            }
        }
    }

    Matrix<double> rss_;
    std::vector<FloorLabel> floors_;
    std::vector<std::string> ap_ids_;
    double sentinel_;
    double rss_min_;
    double rss_max_;
    std::vector<FloorLabel> labels_;
};

struct DatasetSummary {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t f = 0;
    double sentinel = 0.0;
    double rss_min = 0.0;
    double rss_max = 0.0;

    friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

inline DatasetSummary summarize(const FingerprintDataset& d) {
    return {d.samples(), d.aps(), d.floor_count(), d.sentinel(), d.rss_min(), d.rss_max()};
}

/// Reads a headered fingerprint CSV. `source` only labels error messages.
inline FingerprintDataset read_fingerprint(std::istream& in, const Schema& schema,
                                           const std::string& source = "<stream>") {
    auto header = csv::read_record(in);
    if (!header) throw DataError(source + ": empty file");

    std::vector<std::size_t> rss_cols;
    std::optional<std::size_t> floor_col;
    for (std::size_t c = 0; c < header->size(); ++c) {
        const auto& name = (*header)[c];
        if (name == schema.floor_column) floor_col = c;
    }
    if (schema.rss_columns) {
        auto [first, last] = *schema.rss_columns;
        if (first > last || last >= header->size())
            throw DataError(source + ": rss column range " + std::to_string(first) + ":" +
                            std::to_string(last) + " outside header of " +
                            std::to_string(header->size()) + " columns");
        for (std::size_t c = first; c <= last; ++c) rss_cols.push_back(c);
    } else {
        for (std::size_t c = 0; c < header->size(); ++c)
            if ((*header)[c].starts_with(schema.rss_prefix) && (!floor_col || c != *floor_col))
                rss_cols.push_back(c);
    }
    if (!floor_col) throw DataError(source + ": missing floor column '" + schema.floor_column + "'");
    if (rss_cols.empty())
        throw DataError(source + ": no rss columns with prefix '" + schema.rss_prefix + "'");
    if (std::find(rss_cols.begin(), rss_cols.end(), *floor_col) != rss_cols.end())
        throw DataError(source + ": floor column overlaps the rss columns");

    std::vector<std::string> ids;
    for (auto c : rss_cols) ids.push_back((*header)[c]);

    std::vector<double> values;
    std::vector<FloorLabel> floors;
    std::size_t row = 0;
    while (auto record = csv::read_record(in)) {
        if (record->size() == 1 && (*record)[0].empty()) continue;  // blank line
        if (record->size() != header->size())
            throw DataError(source + ": row " + std::to_string(row) + " has " +
                            std::to_string(record->size()) + " fields, header has " +
                            std::to_string(header->size()));
        for (auto c : rss_cols) {
            auto v = csv::parse_number((*record)[c]);
            if (!v || !std::isfinite(*v))
                throw DataError(source + ": row " + std::to_string(row) + ", column '" +
                                (*header)[c] + "': non-numeric rss value '" + (*record)[c] + "'");
            values.push_back(*v);
        }
        auto label = csv::parse_number((*record)[*floor_col]);
        if (!label || *label != std::floor(*label) || std::abs(*label) > 1e9)
            throw DataError(source + ": row " + std::to_string(row) + ": floor label '" +
                            (*record)[*floor_col] + "' is not an integer");
        floors.push_back(static_cast<FloorLabel>(*label));
        ++row;
    }
    try {
        return FingerprintDataset(Matrix<double>(row, rss_cols.size(), std::move(values)),
                                  std::move(floors), std::move(ids), schema.sentinel,
                                  schema.rss_min, schema.rss_max);
    } catch (const DataError& e) {
        throw DataError(source + ": " + e.what());
    }
}

inline FingerprintDataset load_fingerprint(const std::filesystem::path& path,
                                           const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
    return read_fingerprint(in, schema, path.string());
}

/// Canonical CSV: ap id columns in order, then the floor column.
inline void write_fingerprint(std::ostream& out, const FingerprintDataset& d,
                              const std::string& floor_column = "FLOOR") {
    csv::Row header(d.ap_ids());
    header.push_back(floor_column);
    csv::write_record(out, header);
    csv::Row row(d.aps() + 1);
    for (std::size_t r = 0; r < d.samples(); ++r) {
        for (std::size_t c = 0; c < d.aps(); ++c) row[c] = csv::format_number(d.rss()(r, c));
        row[d.aps()] = std::to_string(d.floors()[r]);
        csv::write_record(out, row);
    }
}

inline void save_fingerprint(const std::filesystem::path& path, const FingerprintDataset& d,
                             const std::string& floor_column = "FLOOR") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file '" + path.string() + "'");
    write_fingerprint(out, d, floor_column);
}

/// Categorical view of a fingerprint used by the importance statistic.
struct DiscretizedDataset {
    /// m x n bin indices in [0, bins); bins - 1 is the not-detected bin.
    Matrix<int> bins_of;
    int bins = 0;
    /// Floor of each sample as an index into `labels`.
    std::vector<int> floor_index;
    std::vector<FloorLabel> labels;

    std::size_t floor_count() const noexcept { return labels.size(); }
    int missing_bin() const noexcept { return bins - 1; }
};

/// Equal-width bin of one non-sentinel value among `bins - 1` signal bins.
inline int signal_bin(double v, double rss_min, double rss_max, int bins) {
    const int signal_bins = bins - 1;
    const double t = (v - rss_min) / (rss_max - rss_min);
    const auto idx = static_cast<long long>(std::floor(t * signal_bins));
    return static_cast<int>(std::clamp<long long>(idx, 0, signal_bins - 1));
}

inline DiscretizedDataset discretize(const FingerprintDataset& d, int bins) {
    if (bins < 2) throw ConfigError("bin count must be at least 2, got " + std::to_string(bins));
    DiscretizedDataset out;
    out.bins = bins;
    out.labels = d.floor_labels();
    out.bins_of = Matrix<int>(d.samples(), d.aps());
    for (std::size_t r = 0; r < d.samples(); ++r) {
        for (std::size_t c = 0; c < d.aps(); ++c) {
            const double v = d.rss()(r, c);
            out.bins_of(r, c) = d.is_sentinel(v) ? bins - 1
                                                 : signal_bin(v, d.rss_min(), d.rss_max(), bins);
        }
    }
    out.floor_index.reserve(d.samples());
    for (auto label : d.floors()) {
        auto it = std::lower_bound(out.labels.begin(), out.labels.end(), label);
        out.floor_index.push_back(static_cast<int>(it - out.labels.begin()));
    }
    return out;
}

/// Row subset, keeping the given order.
inline FingerprintDataset select_rows(const FingerprintDataset& d,
                                      const std::vector<std::size_t>& rows) {
    std::vector<double> values;
    values.reserve(rows.size() * d.aps());
    std::vector<FloorLabel> floors;
    floors.reserve(rows.size());
    for (auto r : rows) {
        auto src = d.rss().row(r);
        values.insert(values.end(), src.begin(), src.end());
        floors.push_back(d.floors()[r]);
    }
    return FingerprintDataset(Matrix<double>(rows.size(), d.aps(), std::move(values)),
                              std::move(floors), d.ap_ids(), d.sentinel(), d.rss_min(),
                              d.rss_max());
}

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified row partition. Each floor contributes round(count * test_fraction)
/// rows to the test side, clamped so both sides keep at least one row.
inline SplitIndices split_indices(const FingerprintDataset& d, double test_fraction,
                                  std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test fraction must lie in (0, 1)");
    std::map<FloorLabel, std::vector<std::size_t>> by_floor;
    for (std::size_t r = 0; r < d.samples(); ++r) by_floor[d.floors()[r]].push_back(r);

    Rng rng(seed);
    SplitIndices out;
    for (auto& [label, rows] : by_floor) {
        if (rows.size() < 2)
            throw DataError("floor " + std::to_string(label) + " has " +
                            std::to_string(rows.size()) + " sample(s); stratified split needs 2");
        rng.shuffle(std::span<std::size_t>(rows));
        auto n_test = static_cast<std::size_t>(std::llround(rows.size() * test_fraction));
        n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
        out.test.insert(out.test.end(), rows.begin(), rows.begin() + n_test);
        out.train.insert(out.train.end(), rows.begin() + n_test, rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

struct TrainTest {
    FingerprintDataset train;
    FingerprintDataset test;
};

inline TrainTest split(const FingerprintDataset& d, double test_fraction, std::uint64_t seed) {
    auto idx = split_indices(d, test_fraction, seed);
    return {select_rows(d, idx.train), select_rows(d, idx.test)};
}

/// Keeps the columns with x_i = 1, preserving their order.
inline FingerprintDataset reduce(const FingerprintDataset& d, std::span<const std::uint8_t> x) {
    require_binary(x, d.aps());
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < x.size(); ++c)
        if (x[c]) keep.push_back(c);
    if (keep.empty()) throw DataError("cannot reduce to an empty AP selection");

    std::vector<double> values;
    values.reserve(d.samples() * keep.size());
    for (std::size_t r = 0; r < d.samples(); ++r)
        for (auto c : keep) values.push_back(d.rss()(r, c));
    std::vector<std::string> ids;
    for (auto c : keep) ids.push_back(d.ap_ids()[c]);
    return FingerprintDataset(Matrix<double>(d.samples(), keep.size(), std::move(values)),
                              d.floors(), std::move(ids), d.sentinel(), d.rss_min(),
                              d.rss_max());
}

}  // namespace apsel
