#include "lambda/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lambda {

// Contributions beyond kCutoffBandwidths are below exp(-32) of the nearest
// retained terms; the cutoff keeps results within ~1e-12 relative of the
// full sum while bounding work in concentrated clusters.

DensityParams DensityParams::defaults_for(const Bounds& bounds) {
    DensityParams p;
    p.min_bandwidth = 1e-6 * bounds.diameter();
    return p;
}

DensityEstimator::DensityEstimator(std::size_t dimension, DensityParams params)
    : dim_(dimension), params_(params) {
    if (dimension == 0)
        throw std::invalid_argument("DensityEstimator: dimension must be >= 1");
    if (params_.k < 1)
        throw std::invalid_argument("DensityEstimator: k must be >= 1");
    if (!(params_.min_bandwidth > 0.0))
        throw std::invalid_argument("DensityEstimator: min_bandwidth must be > 0");
    if (params_.rebuild_interval < 1)
        throw std::invalid_argument("DensityEstimator: rebuild_interval must be >= 1");
}

SamplePoint DensityEstimator::point(std::size_t index) const {
    return SamplePoint(coords_.begin() + static_cast<std::ptrdiff_t>(index * dim_),
                       coords_.begin() + static_cast<std::ptrdiff_t>((index + 1) * dim_));
}

void DensityEstimator::add_point(const SamplePoint& p) {
    if (p.size() != dim_)
        throw std::invalid_argument("DensityEstimator: point dimension mismatch");
    for (double c : p)
        if (!std::isfinite(c))
            throw std::invalid_argument("DensityEstimator: non-finite coordinate");
    coords_.insert(coords_.end(), p.begin(), p.end());
    if (++inserts_since_rebuild_ >= params_.rebuild_interval) {
        index_.build(coords_, dim_);
        indexed_count_ = size();
        inserts_since_rebuild_ = 0;
        ++rebuilds_;
    }
}

void DensityEstimator::add_points(const std::vector<SamplePoint>& points) {
    for (const auto& p : points) add_point(p);
}

void DensityEstimator::knn_raw(const SamplePoint& query, std::size_t k,
                               std::vector<KdTree::Neighbor>& heap) const {
    index_.knn(query, k, heap);
    // Points inserted since the last rebuild are scanned directly.
    auto heap_less = [](const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
        return a < b;
    };
    for (std::size_t i = indexed_count_; i < size(); ++i) {
        const double* p = coords_.data() + i * dim_;
        double d2 = 0.0;
        for (std::size_t a = 0; a < dim_; ++a) {
            const double d = query[a] - p[a];
            d2 += d * d;
        }
        KdTree::Neighbor cand{d2, i};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), heap_less);
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end(), heap_less);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), heap_less);
        }
    }
    std::sort_heap(heap.begin(), heap.end(), heap_less);
}

std::vector<DensityEstimator::Neighbor> DensityEstimator::knn(const SamplePoint& query,
                                                              std::size_t k) const {
    if (empty()) throw std::runtime_error("DensityEstimator::knn: no points stored");
    if (k < 1) throw std::invalid_argument("DensityEstimator::knn: k must be >= 1");
    if (query.size() != dim_)
        throw std::invalid_argument("DensityEstimator::knn: query dimension mismatch");
    std::vector<KdTree::Neighbor> heap;
    heap.reserve(std::min(k, size()));
    knn_raw(query, k, heap);
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const auto& n : heap)
        out.push_back(Neighbor{point(n.index), std::sqrt(n.dist_sq), n.index});
    return out;
}

double DensityEstimator::bandwidth(const SamplePoint& query) const {
    if (empty()) throw std::runtime_error("DensityEstimator::bandwidth: no points stored");
    if (query.size() != dim_)
        throw std::invalid_argument("DensityEstimator::bandwidth: query dimension mismatch");
    std::vector<KdTree::Neighbor> heap;
    heap.reserve(std::min(params_.k, size()));
    knn_raw(query, params_.k, heap);
    return std::max(std::sqrt(heap.back().dist_sq), params_.min_bandwidth);
}

double DensityEstimator::density(const SamplePoint& query) const {
    const double h = bandwidth(query);  // validates state and query
    const double r_sq = kCutoffBandwidths * kCutoffBandwidths * h * h;
    const double inv_two_h_sq = 1.0 / (2.0 * h * h);

    double sum = index_.kernel_sum(query, r_sq, inv_two_h_sq);
    for (std::size_t i = indexed_count_; i < size(); ++i) {
        const double* p = coords_.data() + i * dim_;
        double d2 = 0.0;
        for (std::size_t a = 0; a < dim_; ++a) {
            const double d = query[a] - p[a];
            d2 += d * d;
        }
        if (d2 <= r_sq) sum += std::exp(-d2 * inv_two_h_sq);
    }
    const double norm =
        std::pow(2.0 * M_PI, -0.5 * static_cast<double>(dim_)) /
        std::pow(h, static_cast<double>(dim_));
    return norm * sum;
}

}  // namespace lambda
