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

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>

#include "apsel/csv.hpp"
#include "apsel/error.hpp"
#include "apsel/matrix.hpp"
#include "apsel/selection.hpp"
#include "apsel/stats.hpp"

namespace apsel {

/// Selection objective
///
///   Q(x, alpha) = -alpha * sum_i I_i x_i + (1 - alpha) * sum_{i,j} R_ij x_i x_j
///
/// The quadratic sum runs over ordered pairs, so every unordered pair counts
/// twice. alpha trades importance against redundancy.
class QuboInstance {
  public:
    QuboInstance(ImportanceVector importance, RedundancyMatrix redundancy, double alpha)
        : importance_(std::move(importance)), redundancy_(std::move(redundancy)), alpha_(alpha) {
        const auto n = importance_.size();
        if (redundancy_.values.rows() != n || redundancy_.values.cols() != n)
            throw DataError("redundancy matrix is not " + std::to_string(n) + "x" +
                            std::to_string(n));
        if (!(alpha_ >= 0.0 && alpha_ <= 1.0))
            throw ConfigError("alpha must lie in [0, 1], got " + csv::format_number(alpha_));
    }

    std::size_t size() const noexcept { return importance_.size(); }
    double alpha() const noexcept { return alpha_; }
    const ImportanceVector& importance() const noexcept { return importance_; }
    const RedundancyMatrix& redundancy() const noexcept { return redundancy_; }

    QuboInstance with_alpha(double alpha) const { return {importance_, redundancy_, alpha}; }

  private:
    ImportanceVector importance_;
    RedundancyMatrix redundancy_;
    double alpha_;
};

/// P(alpha) with x^T P x == Q(x, alpha) for binary x.
struct QuboMatrix {
    Matrix<double> p;

    std::size_t size() const noexcept { return p.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return p(i, j); }
};

/// P_ij = R_ij - alpha * (R_ij + delta_ij * I_i).
inline QuboMatrix build_matrix(const QuboInstance& inst) {
    const auto n = inst.size();
    const double a = inst.alpha();
    const auto& imp = inst.importance();
    const auto& red = inst.redundancy();
    QuboMatrix out{Matrix<double>(n, n, 0.0)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.p(i, j) = red(i, j) - a * (red(i, j) + (i == j ? imp[i] : 0.0));
    return out;
}

/// I(x) = sum_i I_i x_i.
inline double importance_of(const QuboInstance& inst, std::span<const std::uint8_t> x) {
    require_binary(x, inst.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) total += inst.importance()[i];
    return total;
}

/// R(x) = sum over ordered pairs (i, j) of R_ij x_i x_j.
inline double redundancy_of(const QuboInstance& inst, std::span<const std::uint8_t> x) {
    require_binary(x, inst.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i]) continue;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j]) total += inst.redundancy()(i, j);
    }
    return total;
}

inline double energy(const QuboInstance& inst, std::span<const std::uint8_t> x) {
    const double a = inst.alpha();
    return -a * importance_of(inst, x) + (1.0 - a) * redundancy_of(inst, x);
}

/// x^T P x, accumulated in row-major index order.
inline double quadratic_form(const QuboMatrix& p, std::span<const std::uint8_t> x) {
    require_binary(x, p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i]) continue;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j]) total += p(i, j);
    }
    return total;
}

inline void write_matrix_csv(std::ostream& out, const Matrix<double>& m) {
    csv::Row row(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) row[j] = csv::format_number(m(i, j));
        csv::write_record(out, row);
    }
}

/// One "i j value" line per nonzero entry (upper triangle including the
/// diagonal), off-diagonal values doubled so the triplets describe
/// sum_{i<=j} q_ij x_i x_j, the convention most external QUBO solvers read.
inline void write_triplets(std::ostream& out, const QuboMatrix& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i; j < p.size(); ++j) {
            const double v = i == j ? p(i, i) : p(i, j) + p(j, i);
            if (v != 0.0) out << i << ' ' << j << ' ' << csv::format_number(v) << '\n';
        }
    }
}

}  // namespace apsel
