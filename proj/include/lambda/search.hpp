#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lambda/core.hpp"
#include "lambda/density.hpp"
#include "lambda/partition.hpp"

namespace lambda {

enum class UcbVariant { rho, ucb1 };

// Reference node for a leaf's exploration contrast: the root keeps the
// penalty growing as a region concentrates samples; the immediate parent
// sees only the local contrast and fades once the tree refines inside a
// dense region.
enum class ScoreReference { root, parent_edge };

struct SearchConfig {
    std::size_t budget = 1500;
    std::size_t init_count = 100;
    std::size_t beam_width = 3;
    std::size_t samples_per_leaf = 5;
    // Fixed exploration factor when >= 0; negative selects the adaptive
    // rule c_p = c_p_range_factor * (max y - min y), refreshed each
    // iteration.
    double c_p = -1.0;
    double c_p_range_factor = 0.1;
    std::size_t retreeify_every = 1;
    std::uint64_t seed = 0;
    UcbVariant ucb = UcbVariant::rho;
    ScoreReference score_ref = ScoreReference::root;
    TreeParams tree;
    std::size_t density_k = 10;
    double min_bandwidth_factor = 1e-6;  // of the bounds diameter
    std::size_t density_rebuild_interval = 256;
    // Rejection proposals per requested point in sample_in_region.
    std::size_t attempts_per_sample = 100;

    void validate() const;
    DensityParams density_params(const Bounds& bounds) const;

    bool operator==(const SearchConfig&) const = default;
};

struct IterationEvent {
    std::size_t iteration = 0;
    std::size_t tree_nodes = 0;
    std::size_t tree_leaves = 0;
    std::vector<int> selected_leaves;
    std::vector<double> selected_scores;
    std::size_t evaluations_after = 0;
};

// Everything needed to replay and score a run.
struct RunTrace {
    std::string algorithm;
    std::string objective;
    double delta = 0.0;
    SearchConfig config;
    std::vector<SampleRecord> records;
    std::vector<IterationEvent> events;  // in-memory diagnostics, not persisted
};

// Eq.-style UCB over mean value and visit counts (ablation variant):
// mean_y(child) + 2 c_p sqrt(2 ln n(parent) / n(child)).
double ucb1(const PartitionNode& parent, const PartitionNode& child, double c_p);

// Density-adaptive UCB: v(child) + c_p ln(rho(parent) / rho(child)).
double ucb_rho(const PartitionNode& parent, const PartitionNode& child, double c_p);

struct ScoredLeaf {
    int id = 0;
    double score = 0.0;
};

// All leaves scored against the reference node, descending by score with id
// as the tie-break. A single-leaf tree yields just the root.
std::vector<ScoredLeaf> rank_leaves(const PartitionTree& tree, double c_p,
                                    UcbVariant variant = UcbVariant::rho,
                                    ScoreReference ref = ScoreReference::root);

// Top-b prefix of rank_leaves.
std::vector<ScoredLeaf> select_beam(const PartitionTree& tree, double c_p,
                                    std::size_t beam_width,
                                    UcbVariant variant = UcbVariant::rho,
                                    ScoreReference ref = ScoreReference::root);

// Draws candidates inside the ranked leaves (beam_width productive leaves,
// skipping starved regions), evaluates them, and appends to the store
// without exceeding `remaining`. Returns indices of the new records and
// the leaves actually used.
struct SimulationResult {
    std::vector<std::size_t> new_records;
    std::vector<ScoredLeaf> used_leaves;
};
SimulationResult simulate_and_evaluate(const Objective& objective,
                                       const std::vector<ScoredLeaf>& ranked,
                                       const PartitionTree& tree,
                                       const SearchConfig& config, RecordStore& store,
                                       std::mt19937_64& rng, std::size_t remaining);

// Feeds new points to the estimator, inserts the records along their
// root-to-leaf paths, and refreshes statistics of every affected node from
// the estimator's current densities.
void backpropagate(PartitionTree& tree, const std::vector<std::size_t>& new_records,
                   const RecordStore& store, DensityEstimator& estimator);

// Per-record densities under the estimator's current state, refreshed
// incrementally: the truncated kernel leaves a record's density bit-exactly
// unchanged unless a new point lands within the cutoff radius of it, so
// only those records are recomputed (everything after an index rebuild,
// whose summation order changes).
class RecordDensityCache {
public:
    const std::vector<double>& densities() const { return densities_; }

    void full_refresh(const RecordStore& store, const DensityEstimator& estimator);

    // Call after the estimator has absorbed the points of `new_records`.
    void apply_new_records(const RecordStore& store, const DensityEstimator& estimator,
                           const std::vector<std::size_t>& new_records);

private:
    std::vector<double> densities_;
    std::vector<double> bandwidths_;
    std::size_t rebuilds_seen_ = 0;
};

// The full density-adaptive tree-search run: Sobol initialization, then
// treeify / select / simulate / backpropagate until the budget is spent.
RunTrace lambda_run(const Objective& objective, double delta, const SearchConfig& config);

}  // namespace lambda
