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
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "apsel/error.hpp"
#include "apsel/locate.hpp"
#include "apsel/parallel.hpp"
#include "apsel/qubo.hpp"
#include "apsel/selection.hpp"
#include "apsel/solver.hpp"
#include "apsel/stats.hpp"

namespace apsel {

enum class SearchMode { robust, paper_faithful };

inline std::string to_string(SearchMode mode) { return mode == SearchMode::robust ? "robust" : "paper-faithful"; }

inline SearchMode parse_search_mode(const std::string& s) {
    if (s == "robust") return SearchMode::robust;
    if (s == "paper-faithful" || s == "paper_faithful") return SearchMode::paper_faithful;
    throw ConfigError("unknown search mode '" + s + "'");
}

struct SearchConfig {
    /// paper-faithful mode stops once accuracy improves by less than this.
    double epsilon = 0.001;
    /// robust mode stops once the alpha interval is this narrow.
    double alpha_precision = 1.0 / 1024.0;
    std::size_t max_iterations = 12;
    SearchMode mode = SearchMode::robust;
    /// Accuracy drop versus the full AP set that still counts as acceptable.
    double accuracy_slack = 0.01;

    void validate() const {
        if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
        if (!(alpha_precision > 0.0 && alpha_precision < 1.0))
            throw ConfigError("alpha precision must lie in (0, 1)");
        if (max_iterations < 1) throw ConfigError("max iterations must be >= 1");
        if (!(accuracy_slack >= 0.0)) throw ConfigError("accuracy slack must be >= 0");
    }
};

struct SearchIteration {
    double alpha = 0.0;
    std::size_t k = 0;
    double accuracy = 0.0;
    /// Interval whose midpoint produced alpha (a sweep records [alpha, alpha]).
    double lower = 0.0;
    double upper = 0.0;
    double energy = 0.0;
    Selection x;
};

struct SearchTrace {
    std::vector<SearchIteration> iterations;
    double base_accuracy = 0.0;
    double result_alpha = 1.0;
    Selection result_x;
    std::size_t result_k = 0;
    double result_accuracy = 0.0;
};

/// Accuracy of the localizer restricted to the selected APs.
using Localizer = std::function<double(const Selection&)>;

/// The datasets are captured by reference and must outlive the localizer.
inline Localizer make_localizer(const FingerprintDataset& train_set, const FingerprintDataset& test_set,
                                const ClassifierSpec& spec) {
    return [&train_set, &test_set, spec](const Selection& x) {
        return accuracy_for_selection(x, train_set, test_set, spec);
    };
}

namespace detail {

inline SearchIteration run_point(const QuboInstance& base, double alpha, const Localizer& localizer,
                                 const SolverFn& solver) {
    const auto solution = solver(base.with_alpha(alpha));
    SearchIteration it;
    it.alpha = alpha;
    it.k = solution.k;
    it.energy = solution.energy;
    it.x = solution.x;
    // An empty selection is never handed to the localizer.
    it.accuracy = solution.k == 0 ? 0.0 : localizer(solution.x);
    return it;
}

/// Smallest-k iterate with accuracy >= threshold; ties go to the higher
/// accuracy, then the earlier iterate.
inline std::optional<std::size_t> best_acceptable(const std::vector<SearchIteration>& its, double threshold) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < its.size(); ++i) {
        if (its[i].accuracy < threshold) continue;
        if (!best || its[i].k < its[*best].k ||
            (its[i].k == its[*best].k && its[i].accuracy > its[*best].accuracy))
            best = i;
    }
    return best;
}

inline void set_result(SearchTrace& trace, const SearchIteration& it) {
    trace.result_alpha = it.alpha;
    trace.result_x = it.x;
    trace.result_k = it.k;
    trace.result_accuracy = it.accuracy;
}

inline void set_full_result(SearchTrace& trace, std::size_t n) {
    trace.result_alpha = 1.0;
    trace.result_x = all_selected(n);
    trace.result_k = n;
    trace.result_accuracy = trace.base_accuracy;
}

}  // namespace detail

/// Bisection on alpha against a localization accuracy oracle.
///
/// Starts from [a, b] = [0, 1] and the accuracy of the full AP set. Each
/// iteration solves the QUBO at alpha = (a + b) / 2, scores the selection,
/// and moves a up when accuracy fell below the full-set accuracy (more APs
/// needed), b down otherwise.
///
/// paper_faithful: loops while acc - prev_acc >= epsilon, with prev_acc
/// starting at the full-set accuracy; returns the last iterate.
///
/// robust: stops when b - a <= alpha_precision, or when an acceptable
/// iterate (accuracy >= base - slack) sits one AP above the largest rejected
/// cardinality below it; returns the smallest acceptable iterate, or the
/// full AP set if none was acceptable.
///
/// Both modes run at most max_iterations solver/localizer rounds.
inline SearchTrace binary_search_alpha(const ImportanceVector& importance, const RedundancyMatrix& redundancy,
                                       const Localizer& localizer, const SolverFn& solver,
                                       const SearchConfig& cfg) {
    cfg.validate();
    const auto n = importance.size();
    const QuboInstance base(importance, redundancy, 0.5);
    SearchTrace trace;
    trace.base_accuracy = localizer(all_selected(n));
    double a = 0.0;
    double b = 1.0;

    if (cfg.mode == SearchMode::paper_faithful) {
        double acc = trace.base_accuracy;
        double prev_acc;
        do {
            prev_acc = acc;
            auto it = detail::run_point(base, 0.5 * (a + b), localizer, solver);
            it.lower = a;
            it.upper = b;
            acc = it.accuracy;
            if (acc < trace.base_accuracy)
                a = it.alpha;
            else
                b = it.alpha;
            trace.iterations.push_back(std::move(it));
        } while (acc - prev_acc >= cfg.epsilon && trace.iterations.size() < cfg.max_iterations);
        detail::set_result(trace, trace.iterations.back());
        return trace;
    }

    const double threshold = trace.base_accuracy - cfg.accuracy_slack;
    std::size_t min_accepted_k = std::numeric_limits<std::size_t>::max();
    while (trace.iterations.size() < cfg.max_iterations) {
        auto it = detail::run_point(base, 0.5 * (a + b), localizer, solver);
        it.lower = a;
        it.upper = b;
        if (it.accuracy < trace.base_accuracy)
            a = it.alpha;
        else
            b = it.alpha;
        if (it.accuracy >= threshold) min_accepted_k = std::min(min_accepted_k, it.k);
        trace.iterations.push_back(std::move(it));

        if (b - a <= cfg.alpha_precision) break;
        if (min_accepted_k != std::numeric_limits<std::size_t>::max()) {
            // The empty selection (k = 0) is rejected by construction.
            std::size_t max_rejected_below = 0;
            for (const auto& prior : trace.iterations)
                if (prior.accuracy < threshold && prior.k < min_accepted_k)
                    max_rejected_below = std::max(max_rejected_below, prior.k);
            if (min_accepted_k <= max_rejected_below + 1) break;
        }
    }
    if (auto best = detail::best_acceptable(trace.iterations, threshold))
        detail::set_result(trace, trace.iterations[*best]);
    else
        detail::set_full_result(trace, n);
    return trace;
}

/// Solves and scores every alpha of an ascending grid in [0, 1]. Points are
/// independent and may run concurrently. The result is the smallest
/// acceptable iterate as in robust search.
inline SearchTrace sweep_alpha(const ImportanceVector& importance, const RedundancyMatrix& redundancy,
                               const Localizer& localizer, const SolverFn& solver, const std::vector<double>& grid,
                               double accuracy_slack = 0.01, std::size_t threads = 1) {
    if (grid.empty()) throw ConfigError("alpha grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw ConfigError("alpha grid values must lie in [0, 1]");
        if (i && grid[i] < grid[i - 1]) throw ConfigError("alpha grid must be ascending");
    }
    const auto n = importance.size();
    const QuboInstance base(importance, redundancy, 0.5);
    SearchTrace trace;
    trace.base_accuracy = localizer(all_selected(n));
    trace.iterations.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        auto it = detail::run_point(base, grid[i], localizer, solver);
        it.lower = grid[i];
        it.upper = grid[i];
        trace.iterations[i] = std::move(it);
    });
    if (auto best = detail::best_acceptable(trace.iterations, trace.base_accuracy - accuracy_slack))
        detail::set_result(trace, trace.iterations[*best]);
    else
        detail::set_full_result(trace, n);
    return trace;
}

/// Evenly spaced grid 0, 1/(points-1), ..., 1.
inline std::vector<double> linear_grid(std::size_t points) {
    if (points < 2) throw ConfigError("alpha grid needs at least 2 points");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

}  // namespace apsel
