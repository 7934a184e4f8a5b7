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

// JSON encodings of the library types (nlohmann/json).

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "apsel/dataset.hpp"
#include "apsel/error.hpp"
#include "apsel/locate.hpp"
#include "apsel/search.hpp"
#include "apsel/solver.hpp"
#include "apsel/stats.hpp"

namespace apsel {

using json = nlohmann::ordered_json;

inline json to_json(const DatasetSummary& s) {
    return {{"m", s.m}, {"n", s.n}, {"f", s.f}, {"sentinel", s.sentinel}, {"rss_min", s.rss_min}, {"rss_max", s.rss_max}};
}

inline json ap_list(const Selection& x, const std::vector<std::string>& ap_ids) {
    json out = json::array();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) out.push_back(ap_ids[i]);
    return out;
}

/// Inverse of ap_list: unknown ids are a data error.
inline Selection selection_from_ids(const json& ids, const std::vector<std::string>& ap_ids) {
    if (!ids.is_array()) throw DataError("selection 'x' must be an array of ap ids");
    Selection x(ap_ids.size(), 0);
    for (const auto& id : ids) {
        if (!id.is_string()) throw DataError("selection entries must be ap id strings");
        auto it = std::find(ap_ids.begin(), ap_ids.end(), id.get<std::string>());
        if (it == ap_ids.end()) throw DataError("selection names unknown ap id '" + id.get<std::string>() + "'");
        x[static_cast<std::size_t>(it - ap_ids.begin())] = 1;
    }
    return x;
}

inline json to_json(const Solution& s, const std::vector<std::string>& ap_ids, double alpha) {
    return {{"x", ap_list(s.x, ap_ids)}, {"energy", s.energy},     {"k", s.k},
            {"solver", s.solver_name},   {"alpha", alpha},          {"wall_time_ms", s.wall_time_ms()}};
}

inline json to_json(const SearchTrace& t, const std::vector<std::string>& ap_ids) {
    json its = json::array();
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
        const auto& it = t.iterations[i];
        its.push_back({{"iteration", i + 1},
                       {"alpha", it.alpha},
                       {"k", it.k},
                       {"accuracy", it.accuracy},
                       {"interval", {it.lower, it.upper}},
                       {"energy", it.energy},
                       {"x", ap_list(it.x, ap_ids)}});
    }
    return {{"base_accuracy", t.base_accuracy},
            {"result_alpha", t.result_alpha},
            {"result_k", t.result_k},
            {"result_accuracy", t.result_accuracy},
            {"result_x", ap_list(t.result_x, ap_ids)},
            {"iterations", std::move(its)}};
}

/// iteration, alpha, k, accuracy
inline void write_trace_csv(std::ostream& out, const SearchTrace& t) {
    csv::write_record(out, {"iteration", "alpha", "k", "accuracy"});
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
        const auto& it = t.iterations[i];
        csv::write_record(out, {std::to_string(i + 1), csv::format_number(it.alpha), std::to_string(it.k),
                                csv::format_number(it.accuracy)});
    }
}

inline json to_json(const AccuracyReport& r) {
    json per_floor = json::object();
    for (std::size_t i = 0; i < r.labels.size(); ++i) per_floor[std::to_string(r.labels[i])] = r.per_floor[i];
    json confusion = json::array();
    for (std::size_t i = 0; i < r.confusion.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
        confusion.push_back(std::move(row));
    }
    return {{"accuracy", r.accuracy},
            {"labels", r.labels},
            {"per_floor", std::move(per_floor)},
            {"confusion", std::move(confusion)},
            {"n_aps_used", r.n_aps_used}};
}

inline json value_summary(const std::vector<double>& values) {
    if (values.empty()) return {{"min", 0.0}, {"max", 0.0}, {"mean", 0.0}};
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    return {{"min", *lo}, {"max", *hi}, {"mean", mean}};
}

inline json to_json(const ImportanceVector& imp) { return value_summary(imp.values); }

/// Summary over the off-diagonal entries.
inline json to_json(const RedundancyMatrix& red) {
    std::vector<double> off;
    for (std::size_t i = 0; i < red.size(); ++i)
        for (std::size_t j = 0; j < red.size(); ++j)
            if (i != j) off.push_back(red(i, j));
    return value_summary(off);
}

}  // namespace apsel
