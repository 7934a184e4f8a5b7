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
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apsel/error.hpp"
#include "apsel/parallel.hpp"
#include "apsel/qubo.hpp"
#include "apsel/rng.hpp"
#include "apsel/selection.hpp"

namespace apsel {

/// Largest n the enumeration solvers accept by default.
inline constexpr std::size_t kExhaustiveCap = 24;

struct AnnealConfig {
    /// Unset means max|P_ij| * n for the instance being solved.
    std::optional<double> initial_temperature;
    double cooling_rate = 0.97;
    std::size_t sweeps = 1000;
    std::size_t restarts = 20;
    std::uint64_t seed = 0;
    /// Worker cap for concurrent restarts; the result does not depend on it.
    std::size_t threads = 1;

    void validate() const {
        if (initial_temperature && !(*initial_temperature > 0.0))
            throw ConfigError("initial temperature must be positive");
        if (!(cooling_rate > 0.0 && cooling_rate < 1.0))
            throw ConfigError("cooling rate must lie in (0, 1)");
        if (sweeps < 1) throw ConfigError("sweeps must be at least 1");
        if (restarts < 1) throw ConfigError("restarts must be at least 1");
    }
};

struct Solution {
    Selection x;
    double energy = 0.0;
    std::size_t k = 0;
    std::string solver_name;
    std::chrono::nanoseconds wall_time{0};

    double wall_time_ms() const { return std::chrono::duration<double, std::milli>(wall_time).count(); }
};

/// Binary state plus cached local fields h_i = sum_{j != i} P_ij x_j, so a
/// single-bit flip costs O(1) to score and O(n) to apply.
class FlipState {
  public:
    FlipState(const QuboMatrix& p, Selection x) : p_(&p), x_(std::move(x)), field_(x_.size(), 0.0) {
        require_binary(x_, p.size());
        const auto n = x_.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && x_[j]) field_[i] += p(i, j);
            if (x_[i]) energy_ += p(i, i) + field_[i];
        }
    }

    /// Q(x with bit i flipped) - Q(x).
    double delta(std::size_t i) const {
        const double gain = (*p_)(i, i) + 2.0 * field_[i];
        return x_[i] ? -gain : gain;
    }

    void flip(std::size_t i) {
        energy_ += delta(i);
        x_[i] ^= 1;
        const double sign = x_[i] ? 1.0 : -1.0;
        for (std::size_t j = 0; j < x_.size(); ++j)
            if (j != i) field_[j] += sign * (*p_)(j, i);
    }

    /// Incrementally maintained energy; drifts by rounding only.
    double energy() const noexcept { return energy_; }
    const Selection& x() const noexcept { return x_; }

  private:
    const QuboMatrix* p_;
    Selection x_;
    std::vector<double> field_;
    double energy_ = 0.0;
};

namespace detail {

inline Solution make_solution(const QuboInstance& inst, Selection x, std::string name,
                              std::chrono::steady_clock::time_point start) {
    Solution s;
    s.energy = energy(inst, x);
    s.k = cardinality(x);
    s.x = std::move(x);
    s.solver_name = std::move(name);
    s.wall_time = std::chrono::steady_clock::now() - start;
    return s;
}

inline Selection mask_to_selection(std::uint32_t mask, std::size_t n) {
    Selection x(n, 0);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    return x;
}

/// Orders tied minimizers: fewer selected APs first, then lexicographically.
inline bool tie_order(const Selection& a, const Selection& b) {
    const auto ka = cardinality(a);
    const auto kb = cardinality(b);
    if (ka != kb) return ka < kb;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline double abs_sum(const QuboMatrix& p) {
    double s = 0.0;
    for (double v : p.p.data()) s += std::abs(v);
    return s;
}

}  // namespace detail

/// All global minimizers of Q among vectors with at most `max_k` ones, in
/// tie order (the first is the canonical answer). Energies are compared
/// after exact re-evaluation; values within 1e-12 * (1 + sum|P_ij|) of the
/// minimum count as ties.
struct Minimizers {
    std::vector<Selection> selections;
    double energy = 0.0;
};

inline Minimizers enumerate_minimizers(const QuboInstance& inst, std::size_t max_k,
                                       std::size_t cap = kExhaustiveCap) {
    const auto n = inst.size();
    if (n > cap || n > 31)
        throw SolverError("enumeration limited to n <= " + std::to_string(std::min<std::size_t>(cap, 31)) +
                          ", instance has n = " + std::to_string(n));
    const auto p = build_matrix(inst);
    const double scale = 1.0 + detail::abs_sum(p);
    const double coarse = 1e-9 * scale;
    const double tie = 1e-12 * scale;

    // Gray-code walk: one bit changes per step, energies updated via fields.
    std::vector<double> field(n, 0.0);
    std::uint32_t mask = 0;
    double e = 0.0;
    double best = 0.0;
    std::vector<std::uint32_t> candidates{0};
    std::size_t prune_at = 1024;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const auto b = static_cast<std::size_t>(std::countr_zero(step));
        const bool on = ((mask >> b) & 1u) == 0;
        const double gain = p(b, b) + 2.0 * field[b];
        e += on ? gain : -gain;
        mask ^= (1u << b);
        const double sign = on ? 1.0 : -1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != b) field[j] += sign * p(j, b);

        if (static_cast<std::size_t>(std::popcount(mask)) > max_k) continue;
        if (e > best + coarse) continue;
        if (e < best) best = e;
        candidates.push_back(mask);
        if (candidates.size() >= prune_at) {
            // Drop entries that the current best has left behind; re-scoring
            // is exact so pruning only uses the coarse window.
            std::erase_if(candidates, [&](std::uint32_t c) {
                return energy(inst, detail::mask_to_selection(c, n)) > best + 2 * coarse;
            });
            prune_at = std::max<std::size_t>(1024, candidates.size() * 2);
        }
    }

    std::vector<std::pair<double, Selection>> scored;
    scored.reserve(candidates.size());
    double exact_best = std::numeric_limits<double>::infinity();
    for (auto c : candidates) {
        auto x = detail::mask_to_selection(c, n);
        const double v = energy(inst, x);
        exact_best = std::min(exact_best, v);
        scored.emplace_back(v, std::move(x));
    }
    Minimizers out;
    out.energy = exact_best;
    for (auto& [v, x] : scored)
        if (v <= exact_best + tie) out.selections.push_back(std::move(x));
    std::sort(out.selections.begin(), out.selections.end(), detail::tie_order);
    return out;
}

/// Exact minimizer by enumeration of all 2^n selections. Ties go to the
/// smallest cardinality, then the lexicographically smallest vector.
inline Solution solve_exhaustive(const QuboInstance& inst, std::size_t cap = kExhaustiveCap) {
    const auto start = std::chrono::steady_clock::now();
    auto mins = enumerate_minimizers(inst, inst.size(), cap);
    return detail::make_solution(inst, std::move(mins.selections.front()), "exhaustive", start);
}

/// min Q(x) subject to |x|_1 <= k_max.
inline Solution constrained_min(const QuboInstance& inst, std::size_t k_max,
                                std::size_t cap = kExhaustiveCap) {
    if (k_max > inst.size())
        throw ConfigError("cardinality budget " + std::to_string(k_max) + " exceeds n = " +
                          std::to_string(inst.size()));
    const auto start = std::chrono::steady_clock::now();
    auto mins = enumerate_minimizers(inst, k_max, cap);
    return detail::make_solution(inst, std::move(mins.selections.front()), "constrained", start);
}

/// Default starting temperature: max|P_ij| * n, or 1 for an all-zero P.
inline double default_initial_temperature(const QuboMatrix& p) {
    double max_abs = 0.0;
    for (double v : p.p.data()) max_abs = std::max(max_abs, std::abs(v));
    return max_abs > 0.0 ? max_abs * static_cast<double>(p.size()) : 1.0;
}

/// Metropolis simulated annealing with single-bit flips.
///
/// Restart r draws from its own stream seeded with seed + r: a random start,
/// then per sweep a random visiting order, accepting a flip when its delta
/// is <= 0 or with probability exp(-delta / T). T is multiplied by the
/// cooling rate after every sweep. The best state seen across all restarts
/// is returned; equal energies go to the lowest restart index.
inline Solution solve_sa(const QuboInstance& inst, const AnnealConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto n = inst.size();
    if (n == 0) return detail::make_solution(inst, {}, "sa", start);
    const auto p = build_matrix(inst);
    const double t0 = cfg.initial_temperature.value_or(default_initial_temperature(p));

    struct RestartResult {
        Selection x;
        double energy = 0.0;
    };
    std::vector<RestartResult> results(cfg.restarts);
    parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
        Rng rng(cfg.seed + r);
        Selection init(n);
        for (auto& bit : init) bit = rng.coin() ? 1 : 0;
        FlipState state(p, std::move(init));
        Selection best = state.x();
        double best_energy = state.energy();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        double temperature = t0;
        for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
            rng.shuffle(std::span<std::size_t>(order));
            for (auto i : order) {
                const double d = state.delta(i);
                if (d <= 0.0 || rng.uniform01() < std::exp(-d / temperature)) {
                    state.flip(i);
                    if (state.energy() < best_energy) {
                        best_energy = state.energy();
                        best = state.x();
                    }
                }
            }
            temperature *= cfg.cooling_rate;
        }
        results[r] = {best, energy(inst, best)};
    });

    std::size_t winner = 0;
    for (std::size_t r = 1; r < results.size(); ++r)
        if (results[r].energy < results[winner].energy) winner = r;
    return detail::make_solution(inst, std::move(results[winner].x), "sa", start);
}

/// Anything that maps an instance to a Solution.
using SolverFn = std::function<Solution(const QuboInstance&)>;

struct SolverOptions {
    AnnealConfig anneal;
    std::size_t exhaustive_cap = kExhaustiveCap;
};

/// Named solver strategies. Callers ask for a solver by name so further
/// backends (for example a remote annealer) plug in without changes.
class SolverRegistry {
  public:
    using Factory = std::function<SolverFn(const SolverOptions&)>;

    static SolverRegistry& instance() {
        static SolverRegistry registry = [] {
            SolverRegistry r;
            r.add("sa", [](const SolverOptions& o) {
                o.anneal.validate();
                return SolverFn([cfg = o.anneal](const QuboInstance& inst) { return solve_sa(inst, cfg); });
            });
            r.add("exhaustive", [](const SolverOptions& o) {
                return SolverFn([cap = o.exhaustive_cap](const QuboInstance& inst) {
                    return solve_exhaustive(inst, cap);
                });
            });
            return r;
        }();
        return registry;
    }

    void add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }

    SolverFn make(const std::string& name, const SolverOptions& options) const {
        auto it = factories_.find(name);
        if (it == factories_.end()) throw ConfigError("unknown solver '" + name + "'");
        return it->second(options);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [name, _] : factories_) out.push_back(name);
        return out;
    }

  private:
    std::map<std::string, Factory> factories_;
};

inline SolverFn make_solver(const std::string& name, const SolverOptions& options = {}) {
    return SolverRegistry::instance().make(name, options);
}

}  // namespace apsel
