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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "apsel/dataset.hpp"
#include "apsel/error.hpp"
#include "apsel/json_io.hpp"
#include "apsel/locate.hpp"
#include "apsel/qubo.hpp"
#include "apsel/search.hpp"
#include "apsel/solver.hpp"
#include "apsel/stats.hpp"
#include "apsel/synthetic.hpp"

namespace apsel {

/// Everything one experiment needs. A single seed drives the split, the
/// annealer, the forest and the synthetic generator.
struct RunConfig {
    std::filesystem::path dataset;
    Schema schema;
    /// When set, the dataset is generated instead of loaded.
    std::optional<SyntheticSpec> synthetic;
    int bins = 10;
    CramerDims cramer_dims = CramerDims::effective;
    double test_fraction = 0.3;
    ClassifierSpec classifier;
    std::string solver = "sa";
    SolverOptions solver_options;
    SearchConfig search;
    std::vector<double> sweep_grid = linear_grid(11);
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::filesystem::path out_dir = "apsel-out";

    /// Pushes seed and thread settings into the nested configs.
    void propagate() {
        solver_options.anneal.seed = seed;
        solver_options.anneal.threads = threads;
        classifier.seed = seed;
        classifier.threads = threads;
        if (synthetic) synthetic->seed = seed;
    }

    void validate() const {
        if (!synthetic && dataset.empty()) throw ConfigError("no dataset path configured");
        if (bins < 2) throw ConfigError("bins must be at least 2");
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
        if (!(schema.rss_min < schema.rss_max)) throw ConfigError("rss range requires min < max");
        classifier.validate();
        solver_options.anneal.validate();
        search.validate();
        if (synthetic) synthetic->validate();
    }
};

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + (where == "config" ? key : where + "." + key) + "'");
}

template <typename T>
void read_opt(const json& obj, const char* key, T& target, const std::string& where) {
    if (!obj.contains(key) || obj[key].is_null()) return;
    try {
        target = obj[key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
    }
}

}  // namespace detail

/// Applies a JSON config tree on top of `cfg` (keys absent keep their value).
inline void apply_config(RunConfig& cfg, const json& root) {
    using detail::read_opt;
    detail::reject_unknown(root,
                           {"dataset", "synthetic", "bins", "cramer_dims", "test_fraction", "classifier", "solver",
                            "search", "sweep", "seed", "threads", "out"},
                           "config");
    if (root.contains("dataset")) {
        const auto& d = root["dataset"];
        detail::reject_unknown(d, {"path", "rss_prefix", "rss_columns", "floor_column", "sentinel", "rss_range"},
                               "dataset");
        std::string path;
        read_opt(d, "path", path, "dataset");
        if (!path.empty()) cfg.dataset = path;
        read_opt(d, "rss_prefix", cfg.schema.rss_prefix, "dataset");
        read_opt(d, "floor_column", cfg.schema.floor_column, "dataset");
        read_opt(d, "sentinel", cfg.schema.sentinel, "dataset");
        if (d.contains("rss_columns")) {
            std::vector<std::size_t> cols;
            read_opt(d, "rss_columns", cols, "dataset");
            if (cols.size() != 2) throw ConfigError("dataset.rss_columns must be [first, last]");
            cfg.schema.rss_columns = std::pair{cols[0], cols[1]};
        }
        if (d.contains("rss_range")) {
            std::vector<double> range;
            read_opt(d, "rss_range", range, "dataset");
            if (range.size() != 2) throw ConfigError("dataset.rss_range must be [min, max]");
            cfg.schema.rss_min = range[0];
            cfg.schema.rss_max = range[1];
        }
    }
    if (root.contains("synthetic")) {
        const auto& s = root["synthetic"];
        detail::reject_unknown(s,
                               {"samples", "floors", "informative", "redundant", "noise", "informative_sigma",
                                "redundant_sigma", "noise_range", "missing_rate"},
                               "synthetic");
        SyntheticSpec spec;
        read_opt(s, "samples", spec.samples, "synthetic");
        read_opt(s, "floors", spec.floors, "synthetic");
        read_opt(s, "informative", spec.informative, "synthetic");
        read_opt(s, "redundant", spec.redundant, "synthetic");
        read_opt(s, "noise", spec.noise, "synthetic");
        read_opt(s, "informative_sigma", spec.informative_sigma, "synthetic");
        read_opt(s, "redundant_sigma", spec.redundant_sigma, "synthetic");
        read_opt(s, "missing_rate", spec.missing_rate, "synthetic");
        if (s.contains("noise_range")) {
            std::vector<double> range;
            read_opt(s, "noise_range", range, "synthetic");
            if (range.size() != 2) throw ConfigError("synthetic.noise_range must be [low, high]");
            spec.noise_low = range[0];
            spec.noise_high = range[1];
        }
        cfg.synthetic = spec;
    }
    read_opt(root, "bins", cfg.bins, "config");
    if (root.contains("cramer_dims")) {
        std::string dims;
        read_opt(root, "cramer_dims", dims, "config");
        if (dims == "effective")
            cfg.cramer_dims = CramerDims::effective;
        else if (dims == "nominal")
            cfg.cramer_dims = CramerDims::nominal;
        else
            throw ConfigError("cramer_dims must be 'effective' or 'nominal'");
    }
    read_opt(root, "test_fraction", cfg.test_fraction, "config");
    if (root.contains("classifier")) {
        const auto& c = root["classifier"];
        detail::reject_unknown(c, {"kind", "k_neighbors", "trees", "max_depth"}, "classifier");
        if (c.contains("kind")) {
            std::string kind;
            read_opt(c, "kind", kind, "classifier");
            cfg.classifier.kind = parse_classifier_kind(kind);
        }
        read_opt(c, "k_neighbors", cfg.classifier.k_neighbors, "classifier");
        read_opt(c, "trees", cfg.classifier.trees, "classifier");
        read_opt(c, "max_depth", cfg.classifier.max_depth, "classifier");
    }
    if (root.contains("solver")) {
        const auto& s = root["solver"];
        detail::reject_unknown(s, {"name", "t0", "cooling", "sweeps", "restarts", "exhaustive_cap"}, "solver");
        read_opt(s, "name", cfg.solver, "solver");
        if (s.contains("t0") && !s["t0"].is_null()) {
            double t0 = 0.0;
            read_opt(s, "t0", t0, "solver");
            cfg.solver_options.anneal.initial_temperature = t0;
        }
        read_opt(s, "cooling", cfg.solver_options.anneal.cooling_rate, "solver");
        read_opt(s, "sweeps", cfg.solver_options.anneal.sweeps, "solver");
        read_opt(s, "restarts", cfg.solver_options.anneal.restarts, "solver");
        read_opt(s, "exhaustive_cap", cfg.solver_options.exhaustive_cap, "solver");
    }
    if (root.contains("search")) {
        const auto& s = root["search"];
        detail::reject_unknown(s, {"mode", "epsilon", "alpha_precision", "max_iterations", "accuracy_slack"},
                               "search");
        if (s.contains("mode")) {
            std::string mode;
            read_opt(s, "mode", mode, "search");
            cfg.search.mode = parse_search_mode(mode);
        }
        read_opt(s, "epsilon", cfg.search.epsilon, "search");
        read_opt(s, "alpha_precision", cfg.search.alpha_precision, "search");
        read_opt(s, "max_iterations", cfg.search.max_iterations, "search");
        read_opt(s, "accuracy_slack", cfg.search.accuracy_slack, "search");
    }
    if (root.contains("sweep")) {
        const auto& s = root["sweep"];
        detail::reject_unknown(s, {"grid", "points"}, "sweep");
        if (s.contains("points")) {
            std::size_t points = 0;
            read_opt(s, "points", points, "sweep");
            cfg.sweep_grid = linear_grid(points);
        }
        read_opt(s, "grid", cfg.sweep_grid, "sweep");
    }
    read_opt(root, "seed", cfg.seed, "config");
    read_opt(root, "threads", cfg.threads, "config");
    std::string out;
    read_opt(root, "out", out, "config");
    if (!out.empty()) cfg.out_dir = out;
}

inline json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "': " + e.what());
    }
}

/// The decision-relevant settings, echoed into reports.
inline json describe(const RunConfig& cfg) {
    json anneal = {{"t0", cfg.solver_options.anneal.initial_temperature
                              ? json(*cfg.solver_options.anneal.initial_temperature)
                              : json(nullptr)},
                   {"cooling", cfg.solver_options.anneal.cooling_rate},
                   {"sweeps", cfg.solver_options.anneal.sweeps},
                   {"restarts", cfg.solver_options.anneal.restarts}};
    return {{"dataset", cfg.synthetic ? json("<synthetic>") : json(cfg.dataset.generic_string())},
            {"bins", cfg.bins},
            {"cramer_dims", cfg.cramer_dims == CramerDims::effective ? "effective" : "nominal"},
            {"test_fraction", cfg.test_fraction},
            {"classifier",
             {{"kind", to_string(cfg.classifier.kind)},
              {"k_neighbors", cfg.classifier.k_neighbors},
              {"trees", cfg.classifier.trees},
              {"max_depth", cfg.classifier.max_depth}}},
            {"solver", cfg.solver},
            {"anneal", std::move(anneal)},
            {"search",
             {{"mode", to_string(cfg.search.mode)},
              {"epsilon", cfg.search.epsilon},
              {"alpha_precision", cfg.search.alpha_precision},
              {"max_iterations", cfg.search.max_iterations},
              {"accuracy_slack", cfg.search.accuracy_slack}}},
            {"seed", cfg.seed}};
}

/// Wall-clock duration of each named stage, in execution order.
class StageTimer {
  public:
    /// Runs fn as stage `name`. Library errors are re-raised with the stage
    /// name prefixed and their category (and so exit code) unchanged.
    template <typename Fn>
    auto run(const std::string& name, Fn&& fn) -> decltype(fn()) {
        const auto start = std::chrono::steady_clock::now();
        auto record = [&] {
            stages_.emplace_back(name, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record();
            } else {
                auto result = fn();
                record();
                return result;
            }
        } catch (const Error& e) {
            record();
            throw Error(e.kind(), "stage '" + name + "': " + e.what());
        }
    }

    json to_json() const {
        json out = json::object();
        for (const auto& [name, ms] : stages_) out[name] = ms;
        return out;
    }

    const std::vector<std::pair<std::string, double>>& stages() const noexcept { return stages_; }

  private:
    std::vector<std::pair<std::string, double>> stages_;
};

/// Dataset, split and statistics shared by every subcommand.
struct Prepared {
    FingerprintDataset full;
    FingerprintDataset train;
    FingerprintDataset test;
    ImportanceVector importance;
    RedundancyMatrix redundancy;
};

inline FingerprintDataset load_dataset(const RunConfig& cfg) {
    if (cfg.synthetic) {
        auto spec = *cfg.synthetic;
        spec.sentinel = cfg.schema.sentinel;
        spec.rss_min = cfg.schema.rss_min;
        spec.rss_max = cfg.schema.rss_max;
        return generate_synthetic(spec).data;
    }
    return load_fingerprint(cfg.dataset, cfg.schema);
}

/// load -> split -> discretize -> importance -> redundancy. Statistics come
/// from the training split only.
inline Prepared prepare(const RunConfig& cfg, StageTimer& timer, bool with_stats = true) {
    auto full = timer.run("load", [&] { return load_dataset(cfg); });
    auto parts = timer.run("split", [&] { return split(full, cfg.test_fraction, cfg.seed); });
    Prepared p{std::move(full), std::move(parts.train), std::move(parts.test), {}, {}};
    if (!with_stats) return p;
    auto disc = timer.run("discretize", [&] { return discretize(p.train, cfg.bins); });
    p.importance = timer.run("importance", [&] { return importance_vector(disc, cfg.cramer_dims, cfg.threads); });
    p.redundancy = timer.run("redundancy", [&] { return redundancy_matrix(p.train, cfg.threads); });
    return p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_json(const std::filesystem::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

inline void write_importance_csv(const std::filesystem::path& path, const ImportanceVector& imp,
                                 const std::vector<std::string>& ap_ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    csv::write_record(out, {"ap_id", "importance"});
    for (std::size_t i = 0; i < imp.size(); ++i) csv::write_record(out, {ap_ids[i], csv::format_number(imp[i])});
}

/// Header row of ap ids, then the n x n matrix.
inline void write_redundancy_csv(const std::filesystem::path& path, const RedundancyMatrix& red,
                                 const std::vector<std::string>& ap_ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    csv::write_record(out, ap_ids);
    write_matrix_csv(out, red.values);
}

inline void write_trace_files(const std::filesystem::path& dir, const SearchTrace& trace,
                              const std::vector<std::string>& ap_ids) {
    write_json(dir / "trace.json", to_json(trace, ap_ids));
    std::ofstream out(dir / "trace.csv", std::ios::binary);
    if (!out) throw DataError("cannot write '" + (dir / "trace.csv").string() + "'");
    write_trace_csv(out, trace);
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

struct RunReport {
    json report;
    SearchTrace trace;
    AccuracyReport full_accuracy;
    AccuracyReport selected_accuracy;
    std::vector<std::filesystem::path> artifacts;
};

/// Full experiment: prepare, binary search on alpha, evaluate the selected
/// and full AP sets, write every artifact into cfg.out_dir. Artifacts are
/// written as soon as they exist so a failing later stage leaves them behind.
inline RunReport run_pipeline(RunConfig cfg) {
    cfg.propagate();
    cfg.validate();
    ensure_dir(cfg.out_dir);
    StageTimer timer;
    RunReport result;
    auto artifact = [&](const std::string& name) {
        result.artifacts.push_back(cfg.out_dir / name);
        return cfg.out_dir / name;
    };

    const auto prepared = prepare(cfg, timer);
    const auto& ids = prepared.train.ap_ids();
    timer.run("write-stats", [&] {
        write_importance_csv(artifact("importance.csv"), prepared.importance, ids);
        write_redundancy_csv(artifact("redundancy.csv"), prepared.redundancy, ids);
    });

    const auto solver = make_solver(cfg.solver, cfg.solver_options);
    const auto localizer = make_localizer(prepared.train, prepared.test, cfg.classifier);
    std::optional<Solution> chosen;
    result.trace = timer.run("search", [&] {
        return binary_search_alpha(prepared.importance, prepared.redundancy, localizer, solver, cfg.search);
    });
    timer.run("write-trace", [&] {
        write_trace_files(cfg.out_dir, result.trace, ids);
        result.artifacts.push_back(cfg.out_dir / "trace.json");
        result.artifacts.push_back(cfg.out_dir / "trace.csv");
    });

    const QuboInstance chosen_inst(prepared.importance, prepared.redundancy, result.trace.result_alpha);
    Solution selection;
    selection.x = result.trace.result_x;
    selection.k = result.trace.result_k;
    selection.energy = energy(chosen_inst, selection.x);
    selection.solver_name = cfg.solver;
    timer.run("evaluate", [&] {
        result.full_accuracy = evaluate_selection(all_selected(ids.size()), prepared.train, prepared.test, cfg.classifier);
        result.selected_accuracy = evaluate_selection(selection.x, prepared.train, prepared.test, cfg.classifier);
    });

    json solution_json = to_json(selection, ids, result.trace.result_alpha);
    solution_json.erase("wall_time_ms");
    timer.run("write-selection", [&] { write_json(artifact("selection.json"), solution_json); });

    auto& r = result.report;
    r["dataset"] = to_json(summarize(prepared.full));
    r["train_samples"] = prepared.train.samples();
    r["test_samples"] = prepared.test.samples();
    r["config"] = describe(cfg);
    r["importance"] = to_json(prepared.importance);
    r["redundancy"] = to_json(prepared.redundancy);
    r["selection"] = solution_json;
    r["selected_fraction"] = static_cast<double>(selection.k) / static_cast<double>(ids.size());
    r["trace"] = to_json(result.trace, ids);
    r["accuracy"] = {{"full", to_json(result.full_accuracy)}, {"selected", to_json(result.selected_accuracy)}};
    result.artifacts.push_back(cfg.out_dir / "report.json");
    json artifacts = json::array();
    for (const auto& a : result.artifacts) artifacts.push_back(a.filename().generic_string());
    r["artifacts"] = artifacts;
    r["timings_ms"] = timer.to_json();
    write_json(cfg.out_dir / "report.json", r);
    return result;
}

struct BenchRow {
    std::string solver;
    std::size_t k = 0;
    double alpha = 0.0;
    double accuracy = 0.0;
    std::size_t iterations = 0;
    double wall_time_ms = 0.0;
};

/// Times the same alpha search once per solver on shared statistics.
inline std::vector<BenchRow> bench(RunConfig cfg, const std::vector<std::string>& solvers) {
    if (solvers.empty()) throw ConfigError("bench needs at least one solver");
    cfg.propagate();
    cfg.validate();
    StageTimer timer;
    const auto prepared = prepare(cfg, timer);
    const auto localizer = make_localizer(prepared.train, prepared.test, cfg.classifier);
    std::vector<BenchRow> rows;
    for (const auto& name : solvers) {
        const auto solver = make_solver(name, cfg.solver_options);
        const auto start = std::chrono::steady_clock::now();
        const auto trace = timer.run("bench-" + name, [&] {
            return binary_search_alpha(prepared.importance, prepared.redundancy, localizer, solver, cfg.search);
        });
        rows.push_back({name, trace.result_k, trace.result_alpha, trace.result_accuracy, trace.iterations.size(),
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()});
    }
    return rows;
}

inline json to_json(const std::vector<BenchRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"solver", r.solver},
                       {"k", r.k},
                       {"alpha", r.alpha},
                       {"accuracy", r.accuracy},
                       {"iterations", r.iterations},
                       {"wall_time_ms", r.wall_time_ms}});
    return out;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    csv::write_record(out, {"solver", "k", "alpha", "accuracy", "iterations", "wall_time_ms"});
    for (const auto& r : rows)
        csv::write_record(out, {r.solver, std::to_string(r.k), csv::format_number(r.alpha),
                                csv::format_number(r.accuracy), std::to_string(r.iterations),
                                csv::format_number(r.wall_time_ms)});
}

}  // namespace apsel
