#pragma once

#include <cstdint>
#include <vector>

#include "lambda/core.hpp"
#include "lambda/kdtree.hpp"

namespace lambda {

struct DensityParams {
    std::size_t k = 10;                 // neighbors defining the balloon bandwidth
    double min_bandwidth = 1e-6;        // absolute floor on h
    std::size_t rebuild_interval = 256; // inserts between index rebuilds

    // min_bandwidth scaled to 1e-6 of the box diagonal.
    static DensityParams defaults_for(const Bounds& bounds);
};

// Balloon-bandwidth Gaussian kernel density estimate over the sample
// history. The kernel integrates to 1 per stored point, so the field is a
// count density: over a region holding m points it averages to roughly
// m / volume. Neighbor queries go through a periodically rebuilt kd-tree;
// points inserted since the last rebuild are scanned directly, so results
// always match brute force exactly.
class DensityEstimator {
public:
    struct Neighbor {
        SamplePoint point;
        double distance = 0.0;
        std::size_t index = 0;  // insertion order
    };

    explicit DensityEstimator(std::size_t dimension, DensityParams params = {});

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return coords_.size() / dim_; }
    bool empty() const { return coords_.empty(); }
    const DensityParams& params() const { return params_; }
    std::size_t rebuild_count() const { return rebuilds_; }
    std::size_t indexed_count() const { return indexed_count_; }

    SamplePoint point(std::size_t index) const;

    void add_point(const SamplePoint& p);
    void add_points(const std::vector<SamplePoint>& points);

    // min(k, size) nearest stored points, ascending by (distance,
    // insertion order).
    std::vector<Neighbor> knn(const SamplePoint& query, std::size_t k) const;

    // h(query) = max(distance to k-th nearest point, min_bandwidth); with
    // fewer than k points stored, the farthest available neighbor.
    double bandwidth(const SamplePoint& query) const;

    // rho(query) = sum_j K_h(query - x_j), Gaussian K normalized to unit
    // mass in d dimensions with h = bandwidth(query). Strictly positive.
    // Contributions beyond kCutoffBandwidths * h vanish under the cutoff.
    double density(const SamplePoint& query) const;

    static constexpr double kCutoffBandwidths = 8.0;

private:
    void knn_raw(const SamplePoint& query, std::size_t k,
                 std::vector<KdTree::Neighbor>& heap) const;

    std::size_t dim_;
    DensityParams params_;
    std::vector<double> coords_;  // flat storage, dim_ per point
    KdTree index_;                // covers the first indexed_count_ points
    std::size_t indexed_count_ = 0;
    std::size_t inserts_since_rebuild_ = 0;
    std::size_t rebuilds_ = 0;
};

}  // namespace lambda
