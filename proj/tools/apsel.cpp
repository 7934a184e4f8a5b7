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

// apsel command-line driver.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apsel/pipeline.hpp"

namespace {

using namespace apsel;

// Flag values; each is applied only when given, so the config file supplies
// everything else.
struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string out;
    std::string mode;
    std::string data;
    bool synthetic = false;
    std::string rss_prefix;
    std::vector<std::size_t> rss_columns;
    std::string floor_column;
    double sentinel = 100.0;
    std::vector<double> rss_range;
    int bins = 10;
    std::string classifier;
    std::size_t knn_k = 3;
    std::size_t forest_trees = 100;
    std::string solver;
    std::size_t sa_sweeps = 0;
    std::size_t sa_restarts = 0;
    double sa_t0 = 0.0;
    double sa_cooling = 0.0;
};

struct Given {
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> apply;

    void add(CLI::Option* opt, std::function<void(RunConfig&)> fn) { apply.emplace_back(opt, std::move(fn)); }

    void into(RunConfig& cfg) const {
        for (const auto& [opt, fn] : apply)
            if (opt->count() > 0) fn(cfg);
    }
};

void add_common(CLI::App& app, Flags& f, Given& given) {
    given.add(app.add_option("--seed", f.seed, "Seed for every stochastic component"),
              [&f](RunConfig& c) { c.seed = f.seed; });
    given.add(app.add_option("--threads", f.threads, "Worker threads (0 = all cores)"),
              [&f](RunConfig& c) { c.threads = f.threads; });
    given.add(app.add_option("--out", f.out, "Output directory"), [&f](RunConfig& c) { c.out_dir = f.out; });
    given.add(app.add_option("--mode", f.mode, "Alpha search mode")->check(CLI::IsMember({"robust", "paper-faithful"})),
              [&f](RunConfig& c) { c.search.mode = parse_search_mode(f.mode); });
    given.add(app.add_option("--data", f.data, "Fingerprint CSV"), [&f](RunConfig& c) {
        c.dataset = f.data;
        c.synthetic.reset();
    });
    given.add(app.add_flag("--synthetic", f.synthetic, "Use the built-in synthetic dataset"), [](RunConfig& c) {
        if (!c.synthetic) c.synthetic = SyntheticSpec{};
    });
    given.add(app.add_option("--rss-prefix", f.rss_prefix, "Prefix of RSS column names"),
              [&f](RunConfig& c) { c.schema.rss_prefix = f.rss_prefix; });
    given.add(app.add_option("--rss-columns", f.rss_columns, "Inclusive RSS column index range first,last")
                  ->delimiter(',')
                  ->expected(2),
              [&f](RunConfig& c) { c.schema.rss_columns = std::pair{f.rss_columns[0], f.rss_columns[1]}; });
    given.add(app.add_option("--floor-column", f.floor_column, "Name of the floor column"),
              [&f](RunConfig& c) { c.schema.floor_column = f.floor_column; });
    given.add(app.add_option("--sentinel", f.sentinel, "RSS value meaning 'not detected'"),
              [&f](RunConfig& c) { c.schema.sentinel = f.sentinel; });
    given.add(app.add_option("--rss-range", f.rss_range, "Valid RSS range min,max")->delimiter(',')->expected(2),
              [&f](RunConfig& c) {
                  c.schema.rss_min = f.rss_range[0];
                  c.schema.rss_max = f.rss_range[1];
              });
    given.add(app.add_option("--bins", f.bins, "Discretization bins including the missing bin"),
              [&f](RunConfig& c) { c.bins = f.bins; });
    given.add(app.add_option("--classifier", f.classifier, "Floor classifier")->check(CLI::IsMember({"knn", "forest"})),
              [&f](RunConfig& c) { c.classifier.kind = parse_classifier_kind(f.classifier); });
    given.add(app.add_option("--knn-k", f.knn_k, "Neighbours for knn"),
              [&f](RunConfig& c) { c.classifier.k_neighbors = f.knn_k; });
    given.add(app.add_option("--forest-trees", f.forest_trees, "Trees in the random forest"),
              [&f](RunConfig& c) { c.classifier.trees = f.forest_trees; });
    given.add(app.add_option("--solver", f.solver, "QUBO solver")->check(CLI::IsMember(SolverRegistry::instance().names())),
              [&f](RunConfig& c) { c.solver = f.solver; });
    given.add(app.add_option("--sa-sweeps", f.sa_sweeps, "Annealing sweeps per restart"),
              [&f](RunConfig& c) { c.solver_options.anneal.sweeps = f.sa_sweeps; });
    given.add(app.add_option("--sa-restarts", f.sa_restarts, "Annealing restarts"),
              [&f](RunConfig& c) { c.solver_options.anneal.restarts = f.sa_restarts; });
    given.add(app.add_option("--sa-t0", f.sa_t0, "Initial annealing temperature"),
              [&f](RunConfig& c) { c.solver_options.anneal.initial_temperature = f.sa_t0; });
    given.add(app.add_option("--sa-cooling", f.sa_cooling, "Geometric cooling rate"),
              [&f](RunConfig& c) { c.solver_options.anneal.cooling_rate = f.sa_cooling; });
}

// Defaults, then the config file, then flags.
RunConfig resolve(const Flags& f, const Given& given, bool default_synthetic) {
    RunConfig cfg;
    if (!f.config.empty()) apply_config(cfg, load_config_file(f.config));
    given.into(cfg);
    if (default_synthetic && !cfg.synthetic) cfg.synthetic = SyntheticSpec{};
    cfg.propagate();
    cfg.validate();
    return cfg;
}

void emit(const std::filesystem::path& path, const json& value) {
    write_json(path, value);
    std::cout << value.dump(2) << "\n";
}

int cmd_stats(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    StageTimer timer;
    const auto p = prepare(cfg, timer);
    const auto& ids = p.train.ap_ids();
    write_importance_csv(cfg.out_dir / "importance.csv", p.importance, ids);
    write_redundancy_csv(cfg.out_dir / "redundancy.csv", p.redundancy, ids);
    json summary = {{"dataset", to_json(summarize(p.full))},
                    {"train_samples", p.train.samples()},
                    {"importance", to_json(p.importance)},
                    {"redundancy", to_json(p.redundancy)},
                    {"timings_ms", timer.to_json()}};
    emit(cfg.out_dir / "stats_summary.json", summary);
    return 0;
}

int cmd_solve(const RunConfig& cfg, double alpha, bool export_qubo) {
    ensure_dir(cfg.out_dir);
    StageTimer timer;
    const auto p = prepare(cfg, timer);
    const QuboInstance inst(p.importance, p.redundancy, alpha);
    if (export_qubo) {
        const auto m = build_matrix(inst);
        std::ofstream dense(cfg.out_dir / "qubo.csv", std::ios::binary);
        write_matrix_csv(dense, m.p);
        std::ofstream triplets(cfg.out_dir / "qubo.txt", std::ios::binary);
        write_triplets(triplets, m);
    }
    const auto solver = make_solver(cfg.solver, cfg.solver_options);
    const auto solution = timer.run("solve", [&] { return solver(inst); });
    emit(cfg.out_dir / "solution.json", to_json(solution, p.train.ap_ids(), alpha));
    return 0;
}

int cmd_auto(const RunConfig& cfg) {
    const auto run = run_pipeline(cfg);
    json brief = {{"k", run.trace.result_k},
                  {"alpha", run.trace.result_alpha},
                  {"selected_accuracy", run.selected_accuracy.accuracy},
                  {"full_accuracy", run.full_accuracy.accuracy},
                  {"iterations", run.trace.iterations.size()},
                  {"report", (cfg.out_dir / "report.json").generic_string()}};
    std::cout << brief.dump(2) << "\n";
    return 0;
}

int cmd_sweep(RunConfig cfg, const std::vector<double>& grid, std::size_t points) {
    if (!grid.empty())
        cfg.sweep_grid = grid;
    else if (points > 0)
        cfg.sweep_grid = linear_grid(points);
    ensure_dir(cfg.out_dir);
    StageTimer timer;
    const auto p = prepare(cfg, timer);
    const auto solver = make_solver(cfg.solver, cfg.solver_options);
    const auto localizer = make_localizer(p.train, p.test, cfg.classifier);
    const auto trace = timer.run("sweep", [&] {
        return sweep_alpha(p.importance, p.redundancy, localizer, solver, cfg.sweep_grid, cfg.search.accuracy_slack,
                           cfg.threads);
    });
    write_trace_files(cfg.out_dir, trace, p.train.ap_ids());
    write_trace_csv(std::cout, trace);
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& selection_file) {
    ensure_dir(cfg.out_dir);
    StageTimer timer;
    const auto p = prepare(cfg, timer, false);
    const auto& ids = p.train.ap_ids();
    Selection x = all_selected(ids.size());
    if (!selection_file.empty()) {
        std::ifstream in(selection_file);
        if (!in) throw ConfigError("cannot open selection file '" + selection_file + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("selection file '" + selection_file + "': " + e.what());
        }
        // Accepts a bare id list or any object carrying one under "x".
        x = selection_from_ids(doc.is_object() ? doc.value("x", json::array()) : doc, ids);
    }
    const auto report = timer.run("evaluate", [&] { return evaluate_selection(x, p.train, p.test, cfg.classifier); });
    emit(cfg.out_dir / "evaluation.json", to_json(report));
    return 0;
}

int cmd_bench(const RunConfig& cfg, const std::vector<std::string>& solvers) {
    ensure_dir(cfg.out_dir);
    const auto rows = bench(cfg, solvers);
    write_json(cfg.out_dir / "bench.json", to_json(rows));
    std::ofstream out(cfg.out_dir / "bench.csv", std::ios::binary);
    write_bench_csv(out, rows);
    write_bench_csv(std::cout, rows);
    return 0;
}

int cmd_gen_synthetic(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    auto spec = cfg.synthetic.value_or(SyntheticSpec{});
    spec.seed = cfg.seed;
    spec.sentinel = cfg.schema.sentinel;
    spec.rss_min = cfg.schema.rss_min;
    spec.rss_max = cfg.schema.rss_max;
    const auto syn = generate_synthetic(spec);
    save_fingerprint(cfg.out_dir / "synthetic.csv", syn.data, cfg.schema.floor_column);
    std::ofstream roles(cfg.out_dir / "synthetic_roles.csv", std::ios::binary);
    csv::write_record(roles, {"ap_id", "role", "source"});
    for (std::size_t i = 0; i < syn.roles.size(); ++i) {
        const bool copy = syn.roles[i] == ApRole::redundant;
        csv::write_record(roles, {syn.data.ap_ids()[i], to_string(syn.roles[i]),
                                  copy ? syn.data.ap_ids()[syn.source[i]] : std::string()});
    }
    std::cout << to_json(summarize(syn.data)).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Access point selection for floor localization via QUBO"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags flags;
    Given given;
    app.add_option("--config", flags.config, "JSON config file; flags override it")->check(CLI::ExistingFile);
    add_common(app, flags, given);

    auto* stats = app.add_subcommand("stats", "Importance and redundancy of every AP");
    auto* solve = app.add_subcommand("solve", "Solve the QUBO at a fixed alpha");
    double alpha = 0.5;
    bool export_qubo = false;
    solve->add_option("--alpha", alpha, "Importance/redundancy balance")->required()->check(CLI::Range(0.0, 1.0));
    solve->add_flag("--export-qubo", export_qubo, "Also write qubo.csv and qubo.txt");
    auto* autos = app.add_subcommand("auto", "Binary search on alpha, evaluate, write the full report");
    auto* sweep = app.add_subcommand("sweep", "Solve and score a grid of alpha values");
    std::vector<double> grid;
    std::size_t points = 0;
    sweep->add_option("--grid", grid, "Comma-separated ascending alpha values")->delimiter(',');
    sweep->add_option("--points", points, "Evenly spaced grid size");
    auto* evaluate = app.add_subcommand("evaluate", "Floor accuracy of an AP selection");
    std::string selection_file;
    evaluate->add_option("--selection", selection_file, "JSON selection (list of AP ids or object with 'x')");
    auto* benchc = app.add_subcommand("bench", "Time the alpha search per solver");
    std::vector<std::string> solvers{"sa"};
    benchc->add_option("--solvers", solvers, "Comma-separated solver names")->delimiter(',');
    auto* gen = app.add_subcommand("gen-synthetic", "Write the synthetic dataset as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
    }

    try {
        const auto cfg = resolve(flags, given, gen->parsed());
        if (stats->parsed()) return cmd_stats(cfg);
        if (solve->parsed()) return cmd_solve(cfg, alpha, export_qubo);
        if (autos->parsed()) return cmd_auto(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg, grid, points);
        if (evaluate->parsed()) return cmd_evaluate(cfg, selection_file);
        if (benchc->parsed()) return cmd_bench(cfg, solvers);
        if (gen->parsed()) return cmd_gen_synthetic(cfg);
    } catch (const Error& e) {
        std::cerr << "apsel: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "apsel: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
