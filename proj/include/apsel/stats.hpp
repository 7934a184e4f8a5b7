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
#include <span>
#include <vector>

#include "apsel/dataset.hpp"
#include "apsel/error.hpp"
#include "apsel/matrix.hpp"
#include "apsel/parallel.hpp"

namespace apsel {

/// Per-AP association with the floor label, each in [0, 1].
struct ImportanceVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Pairwise |Pearson| between AP columns: symmetric, zero diagonal, in [0, 1].
struct RedundancyMatrix {
    Matrix<double> values;

    std::size_t size() const noexcept { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

using ContingencyTable = Matrix<std::int64_t>;

/// Cramér's V denominator dimensions: by default only rows/columns with a
/// nonzero marginal count; `nominal` uses the full table shape.
enum class CramerDims { effective, nominal };

/// Counts of (bin, floor) pairs; `bins` rows by `floors` columns.
inline ContingencyTable contingency_table(std::span<const int> bin_column,
                                          std::span<const int> floor_column, int bins,
                                          int floors) {
    if (bin_column.size() != floor_column.size())
        throw DataError("contingency table inputs differ in length");
    ContingencyTable table(static_cast<std::size_t>(bins), static_cast<std::size_t>(floors), 0);
    for (std::size_t s = 0; s < bin_column.size(); ++s) {
        const int u = bin_column[s];
        const int v = floor_column[s];
        if (u < 0 || u >= bins || v < 0 || v >= floors)
            throw DataError("contingency table index out of range at sample " + std::to_string(s));
        ++table(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    }
    return table;
}

/// Table dimensions inferred from the largest index in each column.
inline ContingencyTable contingency_table(std::span<const int> bin_column,
                                          std::span<const int> floor_column) {
    if (bin_column.size() != floor_column.size())
        throw DataError("contingency table inputs differ in length");
    const int bins = bin_column.empty() ? 0 : *std::max_element(bin_column.begin(), bin_column.end()) + 1;
    const int floors =
        floor_column.empty() ? 0 : *std::max_element(floor_column.begin(), floor_column.end()) + 1;
    return contingency_table(bin_column, floor_column, bins, floors);
}

namespace detail {

struct Marginals {
    std::vector<double> rows;
    std::vector<double> cols;
    double total = 0.0;
};

inline Marginals marginals(const ContingencyTable& t) {
    Marginals m{std::vector<double>(t.rows(), 0.0), std::vector<double>(t.cols(), 0.0), 0.0};
    for (std::size_t u = 0; u < t.rows(); ++u) {
        for (std::size_t v = 0; v < t.cols(); ++v) {
            const auto o = static_cast<double>(t(u, v));
            m.rows[u] += o;
            m.cols[v] += o;
            m.total += o;
        }
    }
    return m;
}

}  // namespace detail

/// Pearson chi-square statistic of independence. Cells with zero expected
/// count (zero row or column marginal) contribute nothing.
inline double chi_square(const ContingencyTable& table) {
    const auto m = detail::marginals(table);
    if (m.total <= 0.0) throw DataError("chi-square of an empty contingency table");
    double chi2 = 0.0;
    for (std::size_t u = 0; u < table.rows(); ++u) {
        if (m.rows[u] == 0.0) continue;
        for (std::size_t v = 0; v < table.cols(); ++v) {
            const double expected = m.rows[u] * m.cols[v] / m.total;
            if (expected <= 0.0) continue;
            const double diff = static_cast<double>(table(u, v)) - expected;
            chi2 += diff * diff / expected;
        }
    }
    return chi2;
}

/// sqrt(chi2 / (m * min(rows - 1, cols - 1))), clamped to [0, 1].
/// A degenerate table (one occupied row or column) has V = 0.
inline double cramers_v(const ContingencyTable& table, std::size_t samples,
                        CramerDims dims = CramerDims::effective) {
    if (samples == 0) return 0.0;
    const auto m = detail::marginals(table);
    if (m.total <= 0.0) return 0.0;
    std::size_t rows = table.rows();
    std::size_t cols = table.cols();
    if (dims == CramerDims::effective) {
        rows = static_cast<std::size_t>(std::count_if(m.rows.begin(), m.rows.end(), [](double x) { return x > 0.0; }));
        cols = static_cast<std::size_t>(std::count_if(m.cols.begin(), m.cols.end(), [](double x) { return x > 0.0; }));
    }
    const std::size_t min_dim = std::min(rows, cols);
    if (min_dim < 2) return 0.0;
    const double denom = static_cast<double>(samples) * static_cast<double>(min_dim - 1);
    return std::clamp(std::sqrt(chi_square(table) / denom), 0.0, 1.0);
}

inline ImportanceVector importance_vector(const DiscretizedDataset& d,
                                          CramerDims dims = CramerDims::effective,
                                          std::size_t threads = 1) {
    const std::size_t n = d.bins_of.cols();
    const std::size_t m = d.bins_of.rows();
    ImportanceVector out{std::vector<double>(n, 0.0)};
    const int floors = static_cast<int>(d.floor_count());
    parallel_for(n, threads, [&](std::size_t c) {
        const auto column = d.bins_of.column(c);
        const auto table = contingency_table(column, d.floor_index, d.bins, floors);
        out.values[c] = cramers_v(table, m, dims);
    });
    return out;
}

namespace detail {

/// Column centered on its mean, with its sum of squares.
struct CenteredColumn {
    std::vector<double> values;
    double sum_squares = 0.0;
};

inline CenteredColumn center(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    CenteredColumn out{std::vector<double>(v.size()), 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.values[i] = v[i] - mean;
        out.sum_squares += out.values[i] * out.values[i];
    }
    return out;
}

/// Correlation of two centered columns; 0 when either has zero variance.
inline double correlation(const CenteredColumn& a, const CenteredColumn& b) {
    if (a.sum_squares <= 0.0 || b.sum_squares <= 0.0) return 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) cross += a.values[i] * b.values[i];
    return std::clamp(cross / std::sqrt(a.sum_squares * b.sum_squares), -1.0, 1.0);
}

}  // namespace detail

/// Sample Pearson correlation; 0 if either input is constant.
inline double pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw DataError("pearson inputs differ in length");
    if (u.size() < 2) throw DataError("pearson needs at least 2 samples");
    return detail::correlation(detail::center(u), detail::center(v));
}

/// R_ij = |pearson(column i, column j)| over sentinel-substituted RSS.
/// Each unordered pair is computed once, in a fixed summation order, so the
/// result does not depend on the thread count.
inline RedundancyMatrix redundancy_matrix(const FingerprintDataset& d, std::size_t threads = 1) {
    const std::size_t n = d.aps();
    if (n < 2) throw DataError("redundancy needs at least 2 APs");
    std::vector<detail::CenteredColumn> centered(n);
    parallel_for(n, threads, [&](std::size_t c) {
        const auto column = d.substituted_column(c);
        centered[c] = detail::center(column);
    });
    RedundancyMatrix out{Matrix<double>(n, n, 0.0)};
    // Row i owns pairs (i, j > i); rows are balanced by pairing i with n-1-i.
    const std::size_t half = (n + 1) / 2;
    auto fill_row = [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = std::abs(detail::correlation(centered[i], centered[j]));
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    };
    parallel_for(half, threads, [&](std::size_t t) {
        fill_row(t);
        if (n - 1 - t != t) fill_row(n - 1 - t);
    });
    return out;
}

}  // namespace apsel
