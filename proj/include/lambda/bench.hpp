#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lambda/core.hpp"
#include "lambda/coverage.hpp"
#include "lambda/search.hpp"

namespace lambda {

// Uniform random baseline: budget independent draws in bounds.
RunTrace random_search(const Objective& objective, const SearchConfig& config);

// Quasi-random baseline: the first budget Sobol points, scaled and
// evaluated in order. Ignores the seed entirely.
RunTrace sobol_search(const Objective& objective, const SearchConfig& config);

// Dispatch by name: "lambda", "lambda-ucb1", "rs", "sobol".
RunTrace run_algorithm(const std::string& name, const Objective& objective, double delta,
                       SearchConfig config);
std::vector<std::string> known_algorithms();

// Deterministic payload (config, seed, records); metadata such as
// timestamps lives in a separate "meta" object and never affects it.
std::string trace_payload_json(const RunTrace& trace);
void write_trace(const std::string& path, const RunTrace& trace);
RunTrace read_trace(const std::string& path);

struct AlgorithmResult {
    std::string algorithm;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<CurvePoint>> curves;  // per seed
    std::vector<std::string> errors;              // per seed, empty = ok
    // Evaluations to reach the report threshold, linearly interpolated
    // between checkpoints; +inf when never reached.
    std::vector<double> evals_to_threshold;
    // Aggregates aligned with the report checkpoints (mean over the seeds
    // whose curve has that checkpoint).
    std::vector<double> mean_f2, min_f2, max_f2;
};

struct BenchmarkReport {
    std::string objective;
    double delta = 0.0;
    std::size_t budget = 0;
    double threshold = 0.95;
    std::vector<std::size_t> checkpoints;
    std::vector<AlgorithmResult> algorithms;
};

double evaluations_to_threshold(const std::vector<CurvePoint>& curve, double threshold);

// Runs every (algorithm, seed) pair, scores coverage curves against the
// grid, and aggregates. Individual run failures are recorded and the
// benchmark continues.
BenchmarkReport run_benchmark(const std::vector<std::string>& algorithms,
                              const Objective& objective, double delta,
                              const GroundTruthGrid& grid, const SearchConfig& base_config,
                              const std::vector<std::size_t>& checkpoints,
                              const std::vector<std::uint64_t>& seeds, double threshold);

std::string report_json(const BenchmarkReport& report);
void write_report(const std::string& path, const BenchmarkReport& report);
// Long-format curves: header algorithm,seed,evaluations,f2.
void write_curves_csv(const std::string& path, const BenchmarkReport& report);
// Single-curve format: header evaluations,f2.
void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve);

}  // namespace lambda
