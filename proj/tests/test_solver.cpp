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

#include <algorithm>

#include "catch_amalgamated.hpp"
#include "support.hpp"
#include "apsel/solver.hpp"

using namespace apsel;
using Catch::Matchers::WithinAbs;

namespace {

QuboInstance two_ap(double alpha) {
    RedundancyMatrix red{Matrix<double>(2, 2, 0.0)};
    red.values(0, 1) = red.values(1, 0) = 0.2;
    return QuboInstance(ImportanceVector{{0.5, 0.3}}, red, alpha);
}

/// Plain enumeration without Gray codes or pruning.
std::pair<double, Selection> brute_force(const QuboInstance& inst, std::size_t max_k) {
    const auto n = inst.size();
    double best = std::numeric_limits<double>::infinity();
    Selection arg;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        Selection x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
        if (cardinality(x) > max_k) continue;
        const double e = testing::naive_energy(inst.importance().values, inst.redundancy().values, inst.alpha(), x);
        if (e < best) {
            best = e;
            arg = x;
        }
    }
    return {best, arg};
}

}  // namespace

TEST_CASE("exhaustive solver on the two-AP instance") {
    auto s = solve_exhaustive(two_ap(0.5));
    CHECK(s.x == Selection{1, 0});
    CHECK_THAT(s.energy, WithinAbs(-0.25, 1e-15));
    CHECK(s.k == 1);
    CHECK(s.solver_name == "exhaustive");

    s = solve_exhaustive(two_ap(0.0));
    CHECK(s.x == Selection{0, 0});
    CHECK(s.energy == 0.0);

    s = solve_exhaustive(two_ap(1.0));
    CHECK(s.x == Selection{1, 1});
    CHECK_THAT(s.energy, WithinAbs(-0.8, 1e-15));
}

TEST_CASE("ties go to fewer APs, then the lexicographically smallest vector") {
    // Zero importance and zero redundancy: every selection has energy 0.
    const QuboInstance flat(ImportanceVector{{0, 0, 0}}, RedundancyMatrix{Matrix<double>(3, 3, 0.0)}, 0.5);
    CHECK(solve_exhaustive(flat).x == Selection{0, 0, 0});
    const auto mins = enumerate_minimizers(flat, 3);
    REQUIRE(mins.selections.size() == 8);
    CHECK(mins.selections[1] == Selection{0, 0, 1});
    CHECK(mins.selections[2] == Selection{0, 1, 0});
    CHECK(mins.selections.back() == Selection{1, 1, 1});
    // Equal importance, no redundancy, alpha = 1: all ones is the unique minimizer.
    const QuboInstance eq(ImportanceVector{{0.4, 0.4}}, RedundancyMatrix{Matrix<double>(2, 2, 0.0)}, 1.0);
    CHECK(enumerate_minimizers(eq, 2).selections == std::vector<Selection>{{1, 1}});
    // With a budget of one, the two singletons tie.
    CHECK(enumerate_minimizers(eq, 1).selections == std::vector<Selection>{{0, 1}, {1, 0}});
}

TEST_CASE("exhaustive enumeration agrees with brute force") {
    Rng rng(8);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 1 + rng.uniform_index(11);
        const auto inst = testing::random_instance(rng, n, rng.uniform01());
        const auto [best, arg] = brute_force(inst, n);
        const auto s = solve_exhaustive(inst);
        CHECK_THAT(s.energy, WithinAbs(best, 1e-12));
        CHECK(std::abs(s.energy - energy(inst, s.x)) <= 1e-12);
        CHECK(s.k == cardinality(s.x));
        const std::size_t budget = rng.uniform_index(n + 1);
        CHECK_THAT(constrained_min(inst, budget).energy, WithinAbs(brute_force(inst, budget).first, 1e-12));
    }
}

TEST_CASE("constrained minimum at the budget extremes") {
    Rng rng(9);
    const auto inst = testing::random_instance(rng, 8, 0.6);
    const auto zero = constrained_min(inst, 0);
    CHECK(zero.x == Selection(8, 0));
    CHECK(zero.energy == 0.0);
    CHECK(constrained_min(inst, 8).x == solve_exhaustive(inst).x);
    CHECK_THAT(constrained_min(two_ap(0.5), 1).energy, WithinAbs(-0.25, 1e-15));
    CHECK_THROWS_AS(constrained_min(inst, 9), ConfigError);
    CHECK(constrained_min(inst, 3).solver_name == "constrained");
}

TEST_CASE("constrained minimum is non-increasing in budget and alpha") {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 2 + rng.uniform_index(9);
        const auto inst = testing::random_instance(rng, n);
        for (double alpha = 0.0; alpha <= 1.0 + 1e-9; alpha += 0.1) {
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k <= n; ++k) {
                const double q = constrained_min(inst.with_alpha(std::min(alpha, 1.0)), k).energy;
                CHECK(q <= prev + 1e-12);
                if (alpha + 0.1 <= 1.0 + 1e-9)
                    CHECK(constrained_min(inst.with_alpha(std::min(alpha + 0.1, 1.0)), k).energy <= q + 1e-12);
                prev = q;
            }
        }
    }
}

TEST_CASE("enumeration refuses instances above the cap") {
    Rng rng(11);
    const auto inst = testing::random_instance(rng, 6);
    CHECK_THROWS_AS(solve_exhaustive(inst, 5), SolverError);
    CHECK_NOTHROW(solve_exhaustive(inst, 6));
}

TEST_CASE("incremental flip delta matches full re-evaluation") {
    Rng rng(12);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.uniform_index(20);
        const auto inst = testing::random_instance(rng, n, rng.uniform01());
        const auto p = build_matrix(inst);
        FlipState state(p, testing::random_selection(rng, n));
        for (int f = 0; f < 30; ++f) {
            const auto i = static_cast<std::size_t>(rng.uniform_index(n));
            Selection next = state.x();
            next[i] ^= 1;
            const double full = energy(inst, next) - energy(inst, state.x());
            CHECK(std::abs(state.delta(i) - full) <= 1e-12);
            state.flip(i);
            CHECK(state.x() == next);
            CHECK(std::abs(state.energy() - energy(inst, next)) <= 1e-12);
        }
    }
}

TEST_CASE("annealing finds the two-AP optimum and is deterministic") {
    AnnealConfig cfg;
    cfg.seed = 3;
    cfg.sweeps = 50;
    cfg.restarts = 4;
    const auto s = solve_sa(two_ap(0.5), cfg);
    CHECK_THAT(s.energy, WithinAbs(-0.25, 1e-15));
    CHECK(s.solver_name == "sa");

    Rng rng(13);
    const auto inst = testing::random_instance(rng, 14);
    const auto a = solve_sa(inst, cfg);
    const auto b = solve_sa(inst, cfg);
    CHECK(a.x == b.x);
    CHECK(a.energy == b.energy);
    CHECK(std::abs(a.energy - energy(inst, a.x)) <= 1e-12);
    CHECK(a.k == cardinality(a.x));
}

TEST_CASE("annealing result does not depend on the thread count") {
    Rng rng(14);
    AnnealConfig cfg;
    cfg.seed = 99;
    cfg.sweeps = 30;
    cfg.restarts = 8;
    for (int t = 0; t < 5; ++t) {
        const auto inst = testing::random_instance(rng, 16, rng.uniform01());
        cfg.threads = 1;
        const auto one = solve_sa(inst, cfg);
        cfg.threads = 4;
        const auto four = solve_sa(inst, cfg);
        CHECK(one.x == four.x);
        CHECK(one.energy == four.energy);
    }
}

TEST_CASE("annealing reaches the exact optimum on small random instances") {
    Rng rng(15);
    int hits = 0;
    for (int t = 0; t < 20; ++t) {
        const auto inst = testing::random_instance(rng, 12, rng.uniform01());
        AnnealConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(t);
        if (solve_sa(inst, cfg).energy <= solve_exhaustive(inst).energy + 1e-9) ++hits;
    }
    CHECK(hits >= 19);
}

TEST_CASE("anneal config validation") {
    AnnealConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.cooling_rate = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.restarts = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.initial_temperature = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("default temperature scales with the matrix") {
    const auto p = build_matrix(two_ap(0.5));
    CHECK_THAT(default_initial_temperature(p), WithinAbs(0.5, 1e-15));
}

TEST_CASE("solvers are looked up by name") {
    const auto names = SolverRegistry::instance().names();
    CHECK(std::find(names.begin(), names.end(), "sa") != names.end());
    CHECK(std::find(names.begin(), names.end(), "exhaustive") != names.end());
    CHECK(make_solver("exhaustive")(two_ap(0.5)).x == Selection{1, 0});
    CHECK_THROWS_AS(make_solver("quantum"), ConfigError);

    SolverRegistry::instance().add("all-ones", [](const SolverOptions&) {
        return SolverFn([](const QuboInstance& inst) {
            Solution s;
            s.x = all_selected(inst.size());
            s.k = inst.size();
            s.energy = energy(inst, s.x);
            s.solver_name = "all-ones";
            return s;
        });
    });
    CHECK(make_solver("all-ones")(two_ap(0.5)).k == 2);
}
