#include "lambda/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lambda {

void KdTree::build(std::vector<double> coords, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("KdTree: dimension must be >= 1");
    if (coords.size() % dim != 0)
        throw std::invalid_argument("KdTree: coords size not a multiple of dim");
    coords_ = std::move(coords);
    dim_ = dim;
    count_ = coords_.size() / dim;
    order_.resize(count_);
    for (std::size_t i = 0; i < count_; ++i) order_[i] = static_cast<std::uint32_t>(i);
    nodes_.clear();
    if (count_ > 0) root_ = build_node(0, static_cast<std::uint32_t>(count_));
}

std::uint32_t KdTree::build_node(std::uint32_t begin, std::uint32_t end) {
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    // Split on the widest axis at the median point.
    std::size_t axis = 0;
    double widest = -1.0;
    for (std::size_t a = 0; a < dim_; ++a) {
        double lo = coords_[order_[begin] * dim_ + a];
        double hi = lo;
        for (std::uint32_t i = begin + 1; i < end; ++i) {
            const double c = coords_[order_[i] * dim_ + a];
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (hi - lo > widest) {
            widest = hi - lo;
            axis = a;
        }
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    // Total order (coordinate, index) keeps the structure deterministic.
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = coords_[a * dim_ + axis];
                         const double cb = coords_[b * dim_ + axis];
                         return ca != cb ? ca < cb : a < b;
                     });
    const double split = coords_[order_[mid] * dim_ + axis];
    const std::uint32_t left = build_node(begin, mid);
    const std::uint32_t right = build_node(mid, end);
    nodes_[id].axis = static_cast<std::int32_t>(axis);
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree::dist_sq(const SamplePoint& q, std::size_t index) const {
    const double* p = coords_.data() + index * dim_;
    double s = 0.0;
    for (std::size_t a = 0; a < dim_; ++a) {
        const double d = q[a] - p[a];
        s += d * d;
    }
    return s;
}

namespace {
// push_heap keeps the maximum under this comparator at the front, i.e. the
// current worst (dist_sq, index) candidate.
inline bool heap_less(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
    return a < b;
}
}  // namespace

void KdTree::knn(const SamplePoint& q, std::size_t k, std::vector<Neighbor>& heap) const {
    if (count_ == 0 || k == 0) return;
    knn_rec(root_, q, k, heap);
}

void KdTree::knn_rec(std::uint32_t node, const SamplePoint& q, std::size_t k,
                     std::vector<Neighbor>& heap) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const std::size_t idx = order_[i];
            Neighbor cand{dist_sq(q, idx), idx};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), heap_less);
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end(), heap_less);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), heap_less);
            }
        }
        return;
    }
    const std::size_t axis = static_cast<std::size_t>(n.axis);
    const double diff = q[axis] - n.split;
    const std::uint32_t near = diff < 0.0 ? n.left : n.right;
    const std::uint32_t far = diff < 0.0 ? n.right : n.left;
    knn_rec(near, q, k, heap);
    // Visit the far side unless it is strictly beyond the current worst;
    // equal axial distance may still improve the index tie-break.
    if (heap.size() < k || diff * diff <= heap.front().dist_sq)
        knn_rec(far, q, k, heap);
}

void KdTree::radius(const SamplePoint& q, double r_sq, std::vector<std::size_t>& out) const {
    if (count_ == 0) return;
    radius_rec(root_, q, r_sq, out);
}

void KdTree::radius_rec(std::uint32_t node, const SamplePoint& q, double r_sq,
                        std::vector<std::size_t>& out) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const std::size_t idx = order_[i];
            if (dist_sq(q, idx) <= r_sq) out.push_back(idx);
        }
        return;
    }
    const std::size_t axis = static_cast<std::size_t>(n.axis);
    const double diff = q[axis] - n.split;
    if (diff < 0.0) {
        radius_rec(n.left, q, r_sq, out);
        if (diff * diff <= r_sq) radius_rec(n.right, q, r_sq, out);
    } else {
        radius_rec(n.right, q, r_sq, out);
        if (diff * diff <= r_sq) radius_rec(n.left, q, r_sq, out);
    }
}

double KdTree::kernel_sum(const SamplePoint& q, double r_sq, double scale) const {
    double sum = 0.0;
    if (count_ > 0) kernel_rec(root_, q, r_sq, scale, sum);
    return sum;
}

void KdTree::kernel_rec(std::uint32_t node, const SamplePoint& q, double r_sq,
                        double scale, double& sum) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (std::uint32_t i = n.begin; i < n.end; ++i) {
            const double d2 = dist_sq(q, order_[i]);
            if (d2 <= r_sq) sum += std::exp(-d2 * scale);
        }
        return;
    }
    const std::size_t axis = static_cast<std::size_t>(n.axis);
    const double diff = q[axis] - n.split;
    if (diff < 0.0) {
        kernel_rec(n.left, q, r_sq, scale, sum);
        if (diff * diff <= r_sq) kernel_rec(n.right, q, r_sq, scale, sum);
    } else {
        kernel_rec(n.right, q, r_sq, scale, sum);
        if (diff * diff <= r_sq) kernel_rec(n.left, q, r_sq, scale, sum);
    }
}

}  // namespace lambda
