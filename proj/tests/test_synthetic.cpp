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
#include <numeric>

#include "catch_amalgamated.hpp"
#include "support.hpp"
#include "apsel/synthetic.hpp"

using namespace apsel;

TEST_CASE("synthetic layout and roles") {
    const auto syn = generate_synthetic(SyntheticSpec{});
    CHECK(syn.data.samples() == 2000);
    CHECK(syn.data.aps() == 20);
    CHECK(syn.data.floor_count() == 6);
    CHECK(syn.columns_with(ApRole::informative) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(syn.columns_with(ApRole::redundant).size() == 10);
    CHECK(syn.columns_with(ApRole::noise).size() == 5);
    for (auto c : syn.columns_with(ApRole::redundant)) {
        REQUIRE(syn.source[c] >= 0);
        CHECK(syn.roles[static_cast<std::size_t>(syn.source[c])] == ApRole::informative);
    }
    CHECK(syn.data.ap_ids().front() == "WAP001");
}

TEST_CASE("synthetic data is a deterministic function of the seed") {
    SyntheticSpec spec;
    spec.seed = 12;
    CHECK(generate_synthetic(spec).data == generate_synthetic(spec).data);
    spec.seed = 13;
    CHECK_FALSE(generate_synthetic(spec).data == generate_synthetic(SyntheticSpec{.seed = 12}).data);
}

TEST_CASE("floors are balanced") {
    const auto syn = generate_synthetic(SyntheticSpec{.samples = 600, .floors = 5});
    std::vector<std::size_t> count(5, 0);
    for (auto f : syn.data.floors()) ++count[static_cast<std::size_t>(f)];
    for (auto c : count) CHECK(c == 120);
}

TEST_CASE("informative APs rank highest in importance and copies track their source") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto syn = generate_synthetic(SyntheticSpec{.seed = seed});
        const auto imp = importance_vector(discretize(syn.data, 10));
        std::vector<std::size_t> order(imp.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return imp[a] > imp[b]; });
        std::vector<std::size_t> top(order.begin(), order.begin() + 5);
        std::sort(top.begin(), top.end());
        CHECK(top == syn.columns_with(ApRole::informative));

        const auto red = redundancy_matrix(syn.data);
        for (auto c : syn.columns_with(ApRole::redundant)) CHECK(red(c, static_cast<std::size_t>(syn.source[c])) > 0.8);
        for (auto c : syn.columns_with(ApRole::noise))
            for (auto i : syn.columns_with(ApRole::informative)) CHECK(red(c, i) < 0.1);
    }
}

TEST_CASE("label-copy and uniform-noise APs separate in importance") {
    // Only label copies and noise: the copies must hold the top importances.
    const auto syn = generate_synthetic(SyntheticSpec{.redundant = 0, .noise = 15, .seed = 3});
    const auto imp = importance_vector(discretize(syn.data, 10));
    double min_inf = 1.0, max_noise = 0.0;
    for (auto c : syn.columns_with(ApRole::informative)) min_inf = std::min(min_inf, imp[c]);
    for (auto c : syn.columns_with(ApRole::noise)) max_noise = std::max(max_noise, imp[c]);
    CHECK(min_inf > max_noise);
}

TEST_CASE("synthetic spec validation") {
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{.floors = 1}), ConfigError);
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{.informative = 0}), ConfigError);
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{.noise_low = -200}), ConfigError);
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{.missing_rate = 1.0}), ConfigError);
}
