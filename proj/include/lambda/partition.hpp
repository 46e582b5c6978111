#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lambda/core.hpp"
#include "lambda/density.hpp"
#include "lambda/sampling.hpp"

namespace lambda {

struct TreeParams {
    std::size_t min_split = 20;
    std::size_t max_depth = 10;
    // Splits below this weighted training accuracy are refused. 0.5 keeps
    // refinement going on oscillatory landscapes where no single linear cut
    // scores well; tighter gates stall the hierarchy there.
    double min_separator_accuracy = 0.5;

    bool operator==(const TreeParams&) const = default;
};

// Inverse-probability-weighted statistics of one node's member records.
// weights[i] = (1/rho_i) / sum_j (1/rho_j); v = sum w_i y_i is the
// density-debiased mean value; rho = sum w_i rho_i is the harmonic mean of
// the member densities. mean_y is the plain average (UCB1 ablation).
struct NodeStats {
    std::vector<double> weights;
    double v = 0.0;
    double rho = 0.0;
    double mean_y = 0.0;
};

NodeStats node_statistics(std::span<const double> values,
                          std::span<const double> densities);
NodeStats node_statistics(const RecordStore& store,
                          std::span<const std::size_t> members,
                          const DensityEstimator& estimator);

// Good/bad labels for a split. Mixed nodes label by y > delta; pure nodes
// fall back to y >= weighted-median(y) so refinement can continue.
std::vector<std::uint8_t> label_records(std::span<const double> values, double delta,
                                        std::span<const double> weights);

struct Separator {
    std::vector<double> normal;
    double offset = 0.0;
    double accuracy = 0.0;  // weighted training accuracy in [0,1]
};

// Weighted regularized least squares on +-1 targets. Returns nothing when
// the geometry is degenerate (all points identical). Points on the
// boundary (w.x+b == 0) route to the good side.
std::optional<Separator> fit_separator(const std::vector<SamplePoint>& points,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const double> weights);

struct PartitionNode {
    int id = 0;
    int parent = -1;
    int good_child = -1;  // w.x+b >= 0 side; -1 marks a leaf
    int bad_child = -1;
    std::vector<double> normal;  // separator, present iff internal
    double offset = 0.0;
    std::vector<std::size_t> members;  // record indices, evaluation order
    std::size_t n = 0;
    double v = 0.0;
    double rho = 0.0;
    double mean_y = 0.0;

    bool is_leaf() const { return good_child < 0; }
};

// Recursive quantization of the search space. Leaves partition the bounds:
// every in-bounds point routes to exactly one leaf.
class PartitionTree {
public:
    const PartitionNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    PartitionNode& node_mut(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const PartitionNode& root() const { return nodes_.front(); }
    std::size_t node_count() const { return nodes_.size(); }
    const TreeParams& params() const { return params_; }

    std::vector<int> leaf_ids() const;
    std::size_t leaf_count() const;

    // Descends separators; boundary ties go to the good child.
    int route(const SamplePoint& x) const;

    // Node ids from the root down to `id` inclusive.
    std::vector<int> path_to(int id) const;

    // Half-space conjunction describing a leaf's subspace.
    RegionConstraint constraint_for(int leaf_id) const;

    std::string dump_json() const;

private:
    friend PartitionTree treeify_with_densities(const RecordStore&,
                                                const std::vector<double>&, double,
                                                const TreeParams&);
    std::vector<PartitionNode> nodes_;
    TreeParams params_;
};

// Rebuilds the partition tree from scratch over the full record store.
// densities[i] is the sampling density at record i's location.
PartitionTree treeify_with_densities(const RecordStore& store,
                                     const std::vector<double>& densities,
                                     double delta, const TreeParams& params);
PartitionTree treeify(const RecordStore& store,
                      const std::function<double(const SamplePoint&)>& density,
                      double delta, const TreeParams& params);
PartitionTree treeify(const RecordStore& store, const DensityEstimator& estimator,
                      double delta, const TreeParams& params);

}  // namespace lambda
