#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lambda/bench.hpp"
#include "lambda/coverage.hpp"
#include "lambda/search.hpp"

namespace {

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void add_config_flags(CLI::App* cmd, lambda::SearchConfig& cfg) {
    cmd->add_option("--budget", cfg.budget, "Total evaluation budget N");
    cmd->add_option("--init", cfg.init_count, "Initial Sobol design size");
    cmd->add_option("--beam", cfg.beam_width, "Beam width (leaves simulated per iteration)");
    cmd->add_option("--samples-per-leaf", cfg.samples_per_leaf,
                    "Candidate evaluations per selected leaf");
    cmd->add_option("--cp", cfg.c_p,
                    "Fixed exploration factor; negative enables the adaptive rule");
    cmd->add_option("--cp-factor", cfg.c_p_range_factor,
                    "Adaptive exploration: c_p = factor * observed value range");
    cmd->add_option("--retreeify-every", cfg.retreeify_every,
                    "Iterations between partition-tree rebuilds");
    cmd->add_option("--min-split", cfg.tree.min_split, "Minimum records to split a node");
    cmd->add_option("--max-depth", cfg.tree.max_depth, "Maximum partition depth");
    cmd->add_option("--min-separator-accuracy", cfg.tree.min_separator_accuracy,
                    "Minimum weighted training accuracy to keep a split");
    cmd->add_option("--density-k", cfg.density_k, "Neighbors for the KDE bandwidth");
    cmd->add_option("--min-bandwidth-factor", cfg.min_bandwidth_factor,
                    "Bandwidth floor as a fraction of the bounds diameter");
    cmd->add_option("--rebuild-interval", cfg.density_rebuild_interval,
                    "Inserts between nearest-neighbor index rebuilds");
    cmd->add_option("--attempts-per-sample", cfg.attempts_per_sample,
                    "Rejection proposals per requested in-region sample");
    cmd->add_option_function<std::string>(
           "--score-ref",
           [&cfg](const std::string& v) {
               if (v == "root")
                   cfg.score_ref = lambda::ScoreReference::root;
               else if (v == "parent")
                   cfg.score_ref = lambda::ScoreReference::parent_edge;
               else
                   throw CLI::ValidationError("--score-ref must be root or parent");
           },
           "Exploration contrast reference: root (default) or parent")
        ->type_name("TEXT");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LAMBDA black-box coverage toolkit"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run one algorithm and write its trace JSON");
    std::string run_objective = "holder-table", run_algo = "lambda", run_out;
    double run_delta = 18.0;
    std::uint64_t run_seed = 0;
    lambda::SearchConfig run_cfg;
    run->add_option("--objective", run_objective, "Objective name or grid:<path>");
    run->add_option("--delta", run_delta, "Inequality criterion");
    run->add_option("--algo", run_algo, "lambda | lambda-ucb1 | rs | sobol");
    run->add_option("--seed", run_seed, "Random seed");
    run->add_option("--out", run_out, "Output trace JSON path")->required();
    add_config_flags(run, run_cfg);

    // grid
    auto* grid = app.add_subcommand("grid", "Write a ground-truth lattice CSV");
    std::string grid_objective = "holder-table", grid_out;
    std::size_t grid_resolution = 256;
    grid->add_option("--objective", grid_objective, "Objective name or grid:<path>");
    grid->add_option("--resolution", grid_resolution, "Lattice points per axis");
    grid->add_option("--out", grid_out, "Output CSV path")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Score a trace against a ground-truth grid");
    std::string eval_trace, eval_grid, eval_checkpoints, eval_out;
    double eval_delta = 18.0;
    eval->add_option("--trace", eval_trace, "Trace JSON path")->required();
    eval->add_option("--grid", eval_grid, "Ground-truth CSV path")->required();
    eval->add_option("--delta", eval_delta, "Inequality criterion");
    eval->add_option("--checkpoints", eval_checkpoints,
                     "Comma-separated evaluation counts (default: trace length)");
    eval->add_option("--out", eval_out, "Output curve CSV path")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Run the full benchmark protocol");
    std::string bench_algos = "lambda,rs,sobol", bench_objective = "holder-table";
    std::string bench_seeds, bench_checkpoints, bench_report_out, bench_curves_out;
    std::string bench_grid_path;
    double bench_delta = 18.0, bench_threshold = 0.95;
    std::size_t bench_repeats = 10, bench_resolution = 256;
    lambda::SearchConfig bench_cfg;
    bench->add_option("--algos", bench_algos, "Comma-separated algorithm names");
    bench->add_option("--objective", bench_objective, "Objective name or grid:<path>");
    bench->add_option("--delta", bench_delta, "Inequality criterion");
    bench->add_option("--repeats", bench_repeats, "Seeded repetitions per algorithm");
    bench->add_option("--seeds", bench_seeds,
                      "Explicit comma-separated seeds (default 0..repeats-1)");
    bench->add_option("--checkpoints", bench_checkpoints,
                      "Comma-separated curve checkpoints (default: 10 even steps)");
    bench->add_option("--threshold", bench_threshold, "F2 threshold for speedup table");
    bench->add_option("--grid-file", bench_grid_path,
                      "Ground-truth CSV (default: generated from the objective)");
    bench->add_option("--resolution", bench_resolution, "Generated grid points per axis");
    bench->add_option("--out-report", bench_report_out, "Report JSON path")->required();
    bench->add_option("--out-curves", bench_curves_out, "Curves CSV path");
    add_config_flags(bench, bench_cfg);

    // dynamics
    auto* dynamics =
        app.add_subcommand("dynamics", "Dump a trace as order-indexed CSV for plotting");
    std::string dyn_trace, dyn_out;
    dynamics->add_option("--trace", dyn_trace, "Trace JSON path")->required();
    dynamics->add_option("--out", dyn_out, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            run_cfg.seed = run_seed;
            const auto objective = lambda::registry_lookup(run_objective);
            const auto trace =
                lambda::run_algorithm(run_algo, objective, run_delta, run_cfg);
            lambda::write_trace(run_out, trace);
            std::cout << "wrote " << trace.records.size() << " records to " << run_out
                      << '\n';
        } else if (*grid) {
            const auto objective = lambda::registry_lookup(grid_objective);
            const auto gt = lambda::GroundTruthGrid::from_objective(objective, grid_resolution);
            gt.save_csv(grid_out);
            std::cout << "wrote " << gt.point_count() << " grid points to " << grid_out
                      << '\n';
        } else if (*eval) {
            const auto trace = lambda::read_trace(eval_trace);
            const auto gt = lambda::GroundTruthGrid::load_csv(eval_grid);
            std::vector<std::size_t> cps = eval_checkpoints.empty()
                                               ? std::vector<std::size_t>{trace.records.size()}
                                               : parse_size_list(eval_checkpoints);
            const auto curve = lambda::coverage_curve(trace, gt, eval_delta, cps);
            lambda::write_curve_csv(eval_out, curve);
            std::cout << "wrote " << curve.size() << " curve points to " << eval_out << '\n';
        } else if (*bench) {
            const auto objective = lambda::registry_lookup(bench_objective);
            const auto algos = parse_name_list(bench_algos);
            std::vector<std::uint64_t> seeds = bench_seeds.empty()
                                                   ? std::vector<std::uint64_t>{}
                                                   : parse_seed_list(bench_seeds);
            if (seeds.empty())
                for (std::uint64_t s = 0; s < bench_repeats; ++s) seeds.push_back(s);
            std::vector<std::size_t> cps = bench_checkpoints.empty()
                                               ? std::vector<std::size_t>{}
                                               : parse_size_list(bench_checkpoints);
            if (cps.empty())
                for (std::size_t i = 1; i <= 10; ++i)
                    cps.push_back(bench_cfg.budget * i / 10);
            const auto gt = bench_grid_path.empty()
                                ? lambda::GroundTruthGrid::from_objective(objective,
                                                                          bench_resolution)
                                : lambda::GroundTruthGrid::load_csv(bench_grid_path);
            const auto report = lambda::run_benchmark(algos, objective, bench_delta, gt,
                                                      bench_cfg, cps, seeds, bench_threshold);
            lambda::write_report(bench_report_out, report);
            if (!bench_curves_out.empty())
                lambda::write_curves_csv(bench_curves_out, report);
            for (const auto& a : report.algorithms) {
                std::cout << a.algorithm << ": final mean F2 = "
                          << (a.mean_f2.empty() ? 0.0 : a.mean_f2.back()) << '\n';
            }
            std::cout << "wrote report to " << bench_report_out << '\n';
        } else if (*dynamics) {
            const auto trace = lambda::read_trace(dyn_trace);
            std::ofstream out(dyn_out);
            if (!out) throw std::runtime_error("dynamics: cannot open '" + dyn_out + "'");
            out.precision(17);
            const std::size_t d = trace.records.empty() ? 0 : trace.records.front().x.size();
            out << "order";
            for (std::size_t a = 0; a < d; ++a) out << ",x" << a + 1;
            out << ",y\n";
            for (const auto& r : trace.records) {
                out << r.order;
                for (double c : r.x) out << ',' << c;
                out << ',' << r.y << '\n';
            }
            if (!out) throw std::runtime_error("dynamics: write failed for '" + dyn_out + "'");
            std::cout << "wrote " << trace.records.size() << " rows to " << dyn_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
