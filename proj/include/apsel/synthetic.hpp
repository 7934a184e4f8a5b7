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
#include <cstdio>
#include <string>
#include <vector>

#include "apsel/dataset.hpp"
#include "apsel/error.hpp"
#include "apsel/rng.hpp"

namespace apsel {

enum class ApRole { informative, redundant, noise };

inline std::string to_string(ApRole role) {
    switch (role) {
        case ApRole::informative: return "informative";
        case ApRole::redundant: return "redundant";
        case ApRole::noise: return "noise";
    }
    return "unknown";
}

/// Generator for fingerprints with known structure:
///  - informative APs: each maps the floor label through its own permutation
///    of evenly spaced signal levels, plus Gaussian noise;
///  - redundant APs: weaker, compressed affine copies of an informative AP
///    with a little extra noise;
///  - noise APs: uniform draws independent of the floor.
struct SyntheticSpec {
    std::size_t samples = 2000;
    std::size_t floors = 6;
    std::size_t informative = 5;
    std::size_t redundant = 10;
    std::size_t noise = 5;
    double informative_sigma = 10.0;
    double redundant_sigma = 3.0;
    double noise_low = -95.0;
    double noise_high = -75.0;
    /// Probability that an informative reading is not detected. Redundant
    /// copies drop out together with their source.
    double missing_rate = 0.02;
    double sentinel = 100.0;
    double rss_min = -104.0;
    double rss_max = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (floors < 2) throw ConfigError("synthetic data needs at least 2 floors");
        if (samples < 2 * floors) throw ConfigError("synthetic data needs at least 2 samples per floor");
        if (informative + redundant + noise < 2) throw ConfigError("synthetic data needs at least 2 APs");
        if (redundant > 0 && informative == 0) throw ConfigError("redundant APs need an informative source");
        if (!(rss_min < rss_max)) throw ConfigError("rss range requires rss_min < rss_max");
        if (!(noise_low <= noise_high && noise_low >= rss_min && noise_high <= rss_max))
            throw ConfigError("noise range must lie inside the rss range");
        if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("missing rate must lie in [0, 1)");
    }
};

struct SyntheticDataset {
    FingerprintDataset data;
    std::vector<ApRole> roles;
    /// For redundant APs, the column index of the informative source; else -1.
    std::vector<int> source;

    std::vector<std::size_t> columns_with(ApRole role) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < roles.size(); ++i)
            if (roles[i] == role) out.push_back(i);
        return out;
    }
};

inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto n = spec.informative + spec.redundant + spec.noise;
    const auto m = spec.samples;
    const auto f = spec.floors;

    std::vector<FloorLabel> floors(m);
    for (std::size_t s = 0; s < m; ++s) floors[s] = static_cast<FloorLabel>(s % f);
    rng.shuffle(std::span<FloorLabel>(floors));

    // Signal levels span the middle of the rss range.
    const double lo = spec.rss_min + 0.15 * (spec.rss_max - spec.rss_min);
    const double hi = spec.rss_min + 0.75 * (spec.rss_max - spec.rss_min);
    auto level = [&](std::size_t v) { return lo + (hi - lo) * static_cast<double>(v) / static_cast<double>(f - 1); };
    auto clamp = [&](double v) { return std::clamp(v, spec.rss_min, spec.rss_max); };

    std::vector<ApRole> roles;
    std::vector<int> source;
    std::vector<double> scale(spec.redundant), shift(spec.redundant);
    // Each informative AP ranks the floors by its own permutation of levels;
    // permutations are drawn so that pairs are nearly uncorrelated.
    std::vector<std::vector<std::size_t>> level_of(spec.informative);
    auto perm_corr = [&](const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
        const double mid = 0.5 * static_cast<double>(f - 1);
        double cross = 0.0, norm = 0.0;
        for (std::size_t v = 0; v < f; ++v) {
            cross += (static_cast<double>(p[v]) - mid) * (static_cast<double>(q[v]) - mid);
            norm += (static_cast<double>(p[v]) - mid) * (static_cast<double>(p[v]) - mid);
        }
        return cross / norm;
    };
    // Small floor counts search every permutation (in random order), larger
    // ones a random sample.
    std::vector<std::vector<std::size_t>> candidates;
    {
        std::vector<std::size_t> perm(f);
        for (std::size_t v = 0; v < f; ++v) perm[v] = v;
        if (f <= 7) {
            do {
                candidates.push_back(perm);
            } while (std::next_permutation(perm.begin(), perm.end()));
            rng.shuffle(std::span<std::vector<std::size_t>>(candidates));
        } else {
            for (int c = 0; c < 512; ++c) {
                rng.shuffle(std::span<std::size_t>(perm));
                candidates.push_back(perm);
            }
        }
    }
    for (std::size_t i = 0; i < spec.informative; ++i) {
        roles.push_back(ApRole::informative);
        source.push_back(-1);
        std::vector<std::size_t> best;
        double best_worst = 2.0;
        for (const auto& perm : candidates) {
            double worst = 0.0;
            for (std::size_t prev = 0; prev < i; ++prev)
                worst = std::max(worst, std::abs(perm_corr(perm, level_of[prev])));
            if (worst < best_worst) {
                best_worst = worst;
                best = perm;
            }
        }
        level_of[i] = std::move(best);
    }
    for (std::size_t j = 0; j < spec.redundant; ++j) {
        roles.push_back(ApRole::redundant);
        source.push_back(static_cast<int>(j % spec.informative));
        scale[j] = rng.uniform(0.3, 0.5);
        shift[j] = rng.uniform(0.0, 0.08) * (spec.rss_max - spec.rss_min);
    }
    for (std::size_t j = 0; j < spec.noise; ++j) {
        roles.push_back(ApRole::noise);
        source.push_back(-1);
    }

    Matrix<double> rss(m, n, spec.sentinel);
    for (std::size_t s = 0; s < m; ++s) {
        const auto fl = static_cast<std::size_t>(floors[s]);
        std::vector<double> clean(spec.informative);
        std::vector<bool> detected(spec.informative);
        for (std::size_t i = 0; i < spec.informative; ++i) {
            clean[i] = clamp(level(level_of[i][fl]) + spec.informative_sigma * rng.normal());
            detected[i] = rng.uniform01() >= spec.missing_rate;
            if (detected[i]) rss(s, i) = clean[i];
        }
        for (std::size_t j = 0; j < spec.redundant; ++j) {
            const auto src = static_cast<std::size_t>(source[spec.informative + j]);
            const double v = spec.rss_min + scale[j] * (clean[src] - spec.rss_min) + shift[j] +
                             spec.redundant_sigma * rng.normal();
            if (detected[src]) rss(s, spec.informative + j) = clamp(v);
        }
        for (std::size_t j = 0; j < spec.noise; ++j)
            rss(s, spec.informative + spec.redundant + j) = rng.uniform(spec.noise_low, spec.noise_high);
    }

    std::vector<std::string> ids(n);
    for (std::size_t c = 0; c < n; ++c) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "WAP%03u", static_cast<unsigned>(c + 1));
        ids[c] = buf;
    }
    return {FingerprintDataset(std::move(rss), std::move(floors), std::move(ids), spec.sentinel, spec.rss_min,
                               spec.rss_max),
            std::move(roles), std::move(source)};
}

}  // namespace apsel
