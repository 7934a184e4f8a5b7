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

// Shared fixtures and slow, obviously-correct reference implementations.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "apsel/dataset.hpp"
#include "apsel/qubo.hpp"
#include "apsel/rng.hpp"
#include "apsel/stats.hpp"

namespace apsel::testing {

inline FingerprintDataset make_dataset(std::size_t rows, std::size_t cols, std::vector<double> values,
                                       std::vector<FloorLabel> floors, double sentinel = 100.0) {
    std::vector<std::string> ids;
    for (std::size_t c = 0; c < cols; ++c) ids.push_back("WAP" + std::to_string(c + 1));
    return FingerprintDataset(Matrix<double>(rows, cols, std::move(values)), std::move(floors), std::move(ids),
                              sentinel, -104.0, 0.0);
}

/// Textbook chi-square: expected counts from marginals, summed cell by cell.
inline double naive_chi_square(const std::vector<std::vector<double>>& t) {
    const std::size_t rows = t.size();
    const std::size_t cols = t.empty() ? 0 : t[0].size();
    double total = 0.0;
    std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            rs[i] += t[i][j];
            cs[j] += t[i][j];
            total += t[i][j];
        }
    double chi = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double e = rs[i] * cs[j] / total;
            if (e > 0.0) chi += (t[i][j] - e) * (t[i][j] - e) / e;
        }
    return chi;
}

inline double naive_cramers_v(const std::vector<std::vector<double>>& t, double m) {
    std::size_t rows = 0, cols = 0;
    for (const auto& row : t) {
        double s = 0.0;
        for (double v : row) s += v;
        if (s > 0.0) ++rows;
    }
    for (std::size_t j = 0; j < (t.empty() ? 0 : t[0].size()); ++j) {
        double s = 0.0;
        for (const auto& row : t) s += row[j];
        if (s > 0.0) ++cols;
    }
    const double k = static_cast<double>(std::min(rows, cols)) - 1.0;
    if (k <= 0.0) return 0.0;
    return std::min(1.0, std::sqrt(naive_chi_square(t) / (m * k)));
}

/// Pearson from raw sums, a different formula from the library's centered form.
inline double naive_pearson(const std::vector<double>& u, const std::vector<double>& v) {
    const double n = static_cast<double>(u.size());
    long double su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        su += u[i];
        sv += v[i];
        suu += static_cast<long double>(u[i]) * u[i];
        svv += static_cast<long double>(v[i]) * v[i];
        suv += static_cast<long double>(u[i]) * v[i];
    }
    const long double cov = suv - su * sv / n;
    const long double vu = suu - su * su / n;
    const long double vv = svv - sv * sv / n;
    if (vu <= 0 || vv <= 0) return 0.0;
    return static_cast<double>(cov / std::sqrt(vu * vv));
}

/// Objective by the definition: linear term over i, quadratic over ordered pairs.
inline double naive_energy(const std::vector<double>& imp, const Matrix<double>& red, double alpha,
                           const std::vector<std::uint8_t>& x) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lin += imp[i] * x[i];
        for (std::size_t j = 0; j < x.size(); ++j) quad += red(i, j) * x[i] * x[j];
    }
    return -alpha * lin + (1.0 - alpha) * quad;
}

/// |correlation| of n columns of low-rank Gaussian data, so R has the
/// structure real redundancy matrices have. Importance is uniform [0, 1].
inline QuboInstance random_instance(Rng& rng, std::size_t n, double alpha = 0.5, std::size_t rows = 40) {
    const std::size_t factors = 3;
    std::vector<std::vector<double>> latent(factors, std::vector<double>(rows));
    for (auto& f : latent)
        for (auto& v : f) v = rng.normal();
    std::vector<std::vector<double>> cols(n, std::vector<double>(rows));
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> w(factors);
        for (auto& v : w) v = rng.uniform(-1.0, 1.0);
        const double noise = rng.uniform(0.2, 1.5);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = noise * rng.normal();
            for (std::size_t f = 0; f < factors; ++f) s += w[f] * latent[f][r];
            cols[c][r] = s;
        }
    }
    RedundancyMatrix red{Matrix<double>(n, n, 0.0)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = std::abs(naive_pearson(cols[i], cols[j]));
            red.values(i, j) = r;
            red.values(j, i) = r;
        }
    ImportanceVector imp{std::vector<double>(n)};
    for (auto& v : imp.values) v = rng.uniform01();
    return QuboInstance(std::move(imp), std::move(red), alpha);
}

inline Selection random_selection(Rng& rng, std::size_t n) {
    Selection x(n);
    for (auto& b : x) b = rng.coin() ? 1 : 0;
    return x;
}

}  // namespace apsel::testing
