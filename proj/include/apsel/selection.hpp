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

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "apsel/error.hpp"

namespace apsel {

/// Binary AP selection vector: x_i = 1 keeps AP i.
using Selection = std::vector<std::uint8_t>;

inline std::size_t cardinality(std::span<const std::uint8_t> x) {
    return std::accumulate(x.begin(), x.end(), std::size_t{0},
                           [](std::size_t acc, std::uint8_t v) { return acc + (v != 0); });
}

/// Throws E unless x has length n and every entry is 0 or 1.
template <typename E = DataError>
void require_binary(std::span<const std::uint8_t> x, std::size_t n) {
    if (x.size() != n)
        throw E("selection has length " + std::to_string(x.size()) + ", expected " +
                std::to_string(n));
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 1) throw E("selection entry " + std::to_string(i) + " is not binary");
}

inline Selection all_selected(std::size_t n) { return Selection(n, 1); }

}  // namespace apsel
