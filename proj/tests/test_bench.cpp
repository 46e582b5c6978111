#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "doctest.h"

#include "lambda/bench.hpp"
#include "lambda/sampling.hpp"

using namespace lambda;

TEST_CASE("random search is reproducible, in bounds, and centered") {
    const auto obj = registry_lookup("holder-table");
    SearchConfig cfg;
    cfg.budget = 10000;
    cfg.seed = 3;
    const auto a = random_search(obj, cfg);
    const auto b = random_search(obj, cfg);
    REQUIRE(a.records.size() == 10000);
    CHECK(a.records == b.records);

    double mean0 = 0.0, mean1 = 0.0;
    for (const auto& r : a.records) {
        CHECK(obj.bounds.contains(r.x));
        mean0 += r.x[0];
        mean1 += r.x[1];
    }
    mean0 /= 10000.0;
    mean1 /= 10000.0;
    // CLT bound: sigma = 20/sqrt(12), 3 sigma of the mean at n = 10000.
    const double three_sigma = 3.0 * (20.0 / std::sqrt(12.0)) / 100.0;
    CHECK(std::abs(mean0) < three_sigma);
    CHECK(std::abs(mean1) < three_sigma);
}

TEST_CASE("sobol search is the scaled sequence, evaluated in order") {
    const auto obj = registry_lookup("holder-table");
    SearchConfig cfg;
    cfg.budget = 256;
    cfg.seed = 17;  // must not matter
    const auto trace = sobol_search(obj, cfg);
    REQUIRE(trace.records.size() == 256);
    const auto expected = scale_to_bounds(sobol_points(2, 256), obj.bounds);
    for (std::size_t i = 0; i < 256; ++i) {
        CHECK(trace.records[i].x == expected[i]);
        CHECK(trace.records[i].y == obj(expected[i]));
    }
    SearchConfig other = cfg;
    other.seed = 99;
    CHECK(sobol_search(obj, other).records == trace.records);
}

TEST_CASE("evaluations_to_threshold interpolates between checkpoints") {
    const std::vector<CurvePoint> curve{{100, 0.2}, {200, 0.6}, {300, 0.9}};
    CHECK(evaluations_to_threshold(curve, 0.4) == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(evaluations_to_threshold(curve, 0.2) == 100.0);
    CHECK(evaluations_to_threshold(curve, 0.1) == 100.0);  // met at the first point
    CHECK(evaluations_to_threshold(curve, 0.75) == doctest::Approx(250.0).epsilon(1e-12));
    CHECK(std::isinf(evaluations_to_threshold(curve, 0.95)));
    CHECK(std::isinf(evaluations_to_threshold({}, 0.5)));
}

TEST_CASE("trace files round-trip and keep a deterministic payload") {
    const auto obj = registry_lookup("holder-table");
    SearchConfig cfg;
    cfg.budget = 150;
    cfg.init_count = 80;
    cfg.seed = 21;
    const auto trace = run_algorithm("lambda", obj, 18.0, cfg);
    write_trace("tmp_trace_rt.json", trace);
    const auto back = read_trace("tmp_trace_rt.json");
    CHECK(back.algorithm == trace.algorithm);
    CHECK(back.objective == trace.objective);
    CHECK(back.delta == trace.delta);
    CHECK(back.config == trace.config);
    REQUIRE(back.records.size() == trace.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
        CHECK(back.records[i].x == trace.records[i].x);  // bit-exact through JSON
        CHECK(back.records[i].y == trace.records[i].y);
        CHECK(back.records[i].order == i);
    }
    CHECK(trace_payload_json(back) == trace_payload_json(trace));
    std::remove("tmp_trace_rt.json");

    CHECK_THROWS_AS(read_trace("missing_trace.json"), std::runtime_error);
}

TEST_CASE("algorithm dispatch") {
    const auto obj = registry_lookup("holder-table");
    SearchConfig cfg;
    cfg.budget = 60;
    cfg.init_count = 40;
    CHECK(run_algorithm("rs", obj, 18.0, cfg).algorithm == "rs");
    CHECK(run_algorithm("sobol", obj, 18.0, cfg).algorithm == "sobol");
    CHECK(run_algorithm("lambda", obj, 18.0, cfg).algorithm == "lambda");
    CHECK(run_algorithm("lambda-ucb1", obj, 18.0, cfg).algorithm == "lambda-ucb1");
    CHECK_THROWS_AS(run_algorithm("annealing", obj, 18.0, cfg), std::out_of_range);
}

TEST_CASE("benchmark report wraps per-seed curves with recomputable aggregates") {
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 48);
    SearchConfig cfg;
    cfg.budget = 160;
    cfg.init_count = 60;
    const std::vector<std::size_t> checkpoints{80, 160};
    const std::vector<std::uint64_t> seeds{0, 1, 2};

    const auto report = run_benchmark({"lambda", "rs"}, obj, 18.0, grid, cfg, checkpoints,
                                      seeds, 0.95);
    REQUIRE(report.algorithms.size() == 2);
    for (const auto& algo : report.algorithms) {
        REQUIRE(algo.curves.size() == seeds.size());
        REQUIRE(algo.mean_f2.size() == checkpoints.size());
        for (const auto& err : algo.errors) CHECK(err.empty());
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& curve : algo.curves) {
                REQUIRE(curve.size() == checkpoints.size());
                CHECK(curve[c].evaluations == checkpoints[c]);
                sum += curve[c].f2;
                lo = std::min(lo, curve[c].f2);
                hi = std::max(hi, curve[c].f2);
            }
            CHECK(algo.mean_f2[c] == doctest::Approx(sum / 3.0).epsilon(1e-12));
            CHECK(algo.min_f2[c] == doctest::Approx(lo).epsilon(1e-12));
            CHECK(algo.max_f2[c] == doctest::Approx(hi).epsilon(1e-12));
        }
    }

    const auto json = report_json(report);
    CHECK(json.find("\"algorithm\": \"lambda\"") != std::string::npos);
}

TEST_CASE("single run wraps into a one-curve report") {
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 32);
    SearchConfig cfg;
    cfg.budget = 120;
    cfg.init_count = 60;
    const auto report =
        run_benchmark({"sobol"}, obj, 18.0, grid, cfg, {120}, {0}, 0.5);
    REQUIRE(report.algorithms.size() == 1);
    REQUIRE(report.algorithms[0].curves.size() == 1);
    CHECK(report.algorithms[0].curves[0].size() == 1);
}

TEST_CASE("individual run failures are recorded and the benchmark continues") {
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 32);
    SearchConfig cfg;
    cfg.budget = 80;
    cfg.init_count = 40;
    const auto report =
        run_benchmark({"nonsense", "sobol"}, obj, 18.0, grid, cfg, {80}, {0, 1}, 0.5);
    REQUIRE(report.algorithms.size() == 2);
    CHECK_FALSE(report.algorithms[0].errors[0].empty());
    CHECK(report.algorithms[0].curves[0].empty());
    CHECK(report.algorithms[1].errors[0].empty());
    REQUIRE(report.algorithms[1].curves[0].size() == 1);
}

TEST_CASE("report and curve files are written") {
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 32);
    SearchConfig cfg;
    cfg.budget = 90;
    cfg.init_count = 50;
    const auto report = run_benchmark({"sobol"}, obj, 18.0, grid, cfg, {50, 90}, {0}, 0.5);
    write_report("tmp_report.json", report);
    write_curves_csv("tmp_curves.csv", report);
    std::FILE* f = std::fopen("tmp_curves.csv", "r");
    REQUIRE(f != nullptr);
    char line[128];
    REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
    CHECK(std::string(line) == "algorithm,seed,evaluations,f2\n");
    std::fclose(f);
    std::remove("tmp_report.json");
    std::remove("tmp_curves.csv");
}
