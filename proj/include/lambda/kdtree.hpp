#pragma once

#include <cstdint>
#include <vector>

#include "lambda/core.hpp"

namespace lambda {

// Exact axis-aligned kd-tree over a fixed snapshot of points. Queries are
// exact: results match a brute-force scan, with equal distances ordered by
// point index.
class KdTree {
public:
    KdTree() = default;

    // coords is row-major: count points of `dim` doubles each. The tree
    // takes its own snapshot of the coordinates.
    void build(std::vector<double> coords, std::size_t dim);

    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    // Pushes candidates into a bounded worst-first heap shared with any
    // unindexed overflow points (see DensityEstimator).
    struct Neighbor {
        double dist_sq;
        std::size_t index;

        bool operator<(const Neighbor& o) const {
            return dist_sq != o.dist_sq ? dist_sq < o.dist_sq : index < o.index;
        }
    };

    void knn(const SamplePoint& q, std::size_t k, std::vector<Neighbor>& heap) const;

    // Appends all indices with squared distance <= r_sq (tree order).
    void radius(const SamplePoint& q, double r_sq, std::vector<std::size_t>& out) const;

    // Sum of exp(-d^2 * scale) over points with d^2 <= r_sq, accumulated in
    // traversal order (identical to walking radius() results).
    double kernel_sum(const SamplePoint& q, double r_sq, double scale) const;

private:
    struct Node {
        std::uint32_t begin = 0, end = 0;  // leaf: range into order_
        std::uint32_t left = 0, right = 0;
        std::int32_t axis = -1;  // < 0 marks a leaf
        double split = 0.0;
    };

    static constexpr std::size_t kLeafSize = 16;

    std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);
    void knn_rec(std::uint32_t node, const SamplePoint& q, std::size_t k,
                 std::vector<Neighbor>& heap) const;
    void radius_rec(std::uint32_t node, const SamplePoint& q, double r_sq,
                    std::vector<std::size_t>& out) const;
    void kernel_rec(std::uint32_t node, const SamplePoint& q, double r_sq, double scale,
                    double& sum) const;
    double dist_sq(const SamplePoint& q, std::size_t index) const;

    std::vector<double> coords_;
    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::uint32_t root_ = 0;
};

}  // namespace lambda
