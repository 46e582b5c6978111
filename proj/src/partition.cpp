#include "lambda/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace lambda {

NodeStats node_statistics(std::span<const double> values,
                          std::span<const double> densities) {
    if (values.empty() || values.size() != densities.size())
        throw std::invalid_argument("node_statistics: need matching nonempty inputs");
    NodeStats s;
    s.weights.resize(values.size());
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < densities.size(); ++i) {
        if (!(densities[i] > 0.0))
            throw std::invalid_argument("node_statistics: densities must be > 0");
        s.weights[i] = 1.0 / densities[i];
        inv_sum += s.weights[i];
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        s.weights[i] /= inv_sum;
        s.v += s.weights[i] * values[i];
        s.rho += s.weights[i] * densities[i];
        s.mean_y += values[i];
    }
    s.mean_y /= static_cast<double>(values.size());
    return s;
}

NodeStats node_statistics(const RecordStore& store,
                          std::span<const std::size_t> members,
                          const DensityEstimator& estimator) {
    std::vector<double> values(members.size()), densities(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        values[i] = store[members[i]].y;
        densities[i] = estimator.density(store[members[i]].x);
    }
    return node_statistics(values, densities);
}

namespace {

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] != values[b] ? values[a] < values[b] : a < b;
    });
    double total = 0.0;
    for (double w : weights) total += w;
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += weights[i];
        if (cum >= 0.5 * total) return values[i];
    }
    return values[order.back()];
}

}  // namespace

std::vector<std::uint8_t> label_records(std::span<const double> values, double delta,
                                        std::span<const double> weights) {
    if (values.empty() || values.size() != weights.size())
        throw std::invalid_argument("label_records: need matching nonempty inputs");
    bool any_good = false, any_bad = false;
    for (double y : values) (y > delta ? any_good : any_bad) = true;
    std::vector<std::uint8_t> labels(values.size());
    if (any_good && any_bad) {
        for (std::size_t i = 0; i < values.size(); ++i)
            labels[i] = values[i] > delta ? 1 : 0;
        return labels;
    }
    const double m = weighted_median(values, weights);
    bool all_good = true;
    for (std::size_t i = 0; i < values.size(); ++i) {
        labels[i] = values[i] >= m ? 1 : 0;
        all_good = all_good && labels[i];
    }
    // A median sitting on the minimum value labels everything good; switch
    // to the strict inequality so plateaued nodes can still split.
    if (all_good) {
        for (std::size_t i = 0; i < values.size(); ++i)
            labels[i] = values[i] > m ? 1 : 0;
    }
    return labels;
}

std::optional<Separator> fit_separator(const std::vector<SamplePoint>& points,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const double> weights) {
    if (points.empty() || points.size() != labels.size() || points.size() != weights.size())
        throw std::invalid_argument("fit_separator: need matching nonempty inputs");
    bool any_good = false, any_bad = false;
    for (auto l : labels) (l ? any_good : any_bad) = true;
    if (!any_good || !any_bad)
        throw std::invalid_argument("fit_separator: both labels must be present");

    const std::size_t d = points.front().size();
    bool all_identical = true;
    for (const auto& p : points) {
        if (p.size() != d) throw std::invalid_argument("fit_separator: ragged points");
        if (p != points.front()) all_identical = false;
    }
    if (all_identical) return std::nullopt;

    // Normal equations for ridge-regularized weighted least squares on
    // augmented features (x, 1) against targets +-1. Training weights are
    // class-balanced so a rare class still pulls the boundary between the
    // classes instead of outside the data; the reported accuracy stays
    // under the caller's raw weights.
    double mass_good = 0.0, mass_bad = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        (labels[i] ? mass_good : mass_bad) += weights[i];
    if (!(mass_good > 0.0) || !(mass_bad > 0.0)) return std::nullopt;

    const std::size_t m = d + 1;
    std::vector<double> a(m * m, 0.0), c(m, 0.0), f(m);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) f[j] = points[i][j];
        f[d] = 1.0;
        const double t = labels[i] ? 1.0 : -1.0;
        const double w = weights[i] * 0.5 / (labels[i] ? mass_good : mass_bad);
        for (std::size_t r = 0; r < m; ++r) {
            c[r] += w * t * f[r];
            for (std::size_t q = r; q < m; ++q) a[r * m + q] += w * f[r] * f[q];
        }
    }
    for (std::size_t r = 1; r < m; ++r)
        for (std::size_t q = 0; q < r; ++q) a[r * m + q] = a[q * m + r];
    double trace = 0.0;
    for (std::size_t r = 0; r < m; ++r) trace += a[r * m + r];
    const double ridge = 1e-8 * trace / static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) a[r * m + r] += ridge;

    // Gaussian elimination with partial pivoting.
    std::vector<std::size_t> piv(m);
    std::iota(piv.begin(), piv.end(), std::size_t{0});
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(a[r * m + col]) > std::abs(a[best * m + col])) best = r;
        if (best != col) {
            for (std::size_t q = 0; q < m; ++q) std::swap(a[col * m + q], a[best * m + q]);
            std::swap(c[col], c[best]);
        }
        const double pivot = a[col * m + col];
        if (!(std::abs(pivot) > 0.0)) return std::nullopt;
        for (std::size_t r = col + 1; r < m; ++r) {
            const double factor = a[r * m + col] / pivot;
            if (factor == 0.0) continue;
            for (std::size_t q = col; q < m; ++q) a[r * m + q] -= factor * a[col * m + q];
            c[r] -= factor * c[col];
        }
    }
    std::vector<double> beta(m);
    for (std::size_t r = m; r-- > 0;) {
        double s = c[r];
        for (std::size_t q = r + 1; q < m; ++q) s -= a[r * m + q] * beta[q];
        beta[r] = s / a[r * m + r];
    }

    Separator sep;
    sep.normal.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(d));
    sep.offset = beta[d];
    double total = 0.0, correct = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const bool good = signed_offset(sep.normal, sep.offset, points[i]) >= 0.0;
        total += weights[i];
        if (good == (labels[i] != 0)) correct += weights[i];
    }
    sep.accuracy = total > 0.0 ? correct / total : 0.0;
    return sep;
}

std::vector<int> PartitionTree::leaf_ids() const {
    std::vector<int> out;
    for (const auto& n : nodes_)
        if (n.is_leaf()) out.push_back(n.id);
    return out;
}

std::size_t PartitionTree::leaf_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_)
        if (n.is_leaf()) ++c;
    return c;
}

int PartitionTree::route(const SamplePoint& x) const {
    int id = 0;
    while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        id = signed_offset(n.normal, n.offset, x) >= 0.0 ? n.good_child : n.bad_child;
    }
    return id;
}

std::vector<int> PartitionTree::path_to(int id) const {
    std::vector<int> path;
    for (int cur = id; cur >= 0; cur = nodes_[static_cast<std::size_t>(cur)].parent)
        path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
}

RegionConstraint PartitionTree::constraint_for(int leaf_id) const {
    RegionConstraint rc;
    const auto path = path_to(leaf_id);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& n = nodes_[static_cast<std::size_t>(path[i])];
        rc.halves.push_back(HalfSpace{n.normal, n.offset, path[i + 1] == n.good_child});
    }
    return rc;
}

std::string PartitionTree::dump_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nlohmann::json j{{"id", n.id},       {"parent", n.parent}, {"n", n.n},
                         {"v", n.v},         {"rho", n.rho},       {"mean_y", n.mean_y}};
        if (!n.is_leaf()) {
            j["children"] = {n.good_child, n.bad_child};
            j["separator"] = {{"normal", n.normal}, {"offset", n.offset}};
        }
        nodes.push_back(std::move(j));
    }
    return nlohmann::json{{"nodes", nodes}}.dump();
}

namespace {

struct TreeBuilder {
    const RecordStore& store;
    const std::vector<double>& densities;  // per record order
    double delta;
    const TreeParams& params;
    std::vector<PartitionNode> nodes;

    void apply_stats(PartitionNode& node) {
        std::vector<double> values(node.members.size()), dens(node.members.size());
        for (std::size_t i = 0; i < node.members.size(); ++i) {
            values[i] = store[node.members[i]].y;
            dens[i] = densities[node.members[i]];
        }
        NodeStats s = node_statistics(values, dens);
        node.n = node.members.size();
        node.v = s.v;
        node.rho = s.rho;
        node.mean_y = s.mean_y;
        stats_cache = std::move(s);
        values_cache = std::move(values);
    }

    NodeStats stats_cache;
    std::vector<double> values_cache;

    void build(int id, std::size_t depth) {
        apply_stats(nodes[static_cast<std::size_t>(id)]);
        if (nodes[static_cast<std::size_t>(id)].members.size() < params.min_split ||
            depth >= params.max_depth)
            return;

        const NodeStats stats = std::move(stats_cache);
        const std::vector<double> values = std::move(values_cache);

        std::vector<SamplePoint> points;
        points.reserve(values.size());
        for (std::size_t m : nodes[static_cast<std::size_t>(id)].members)
            points.push_back(store[m].x);

        auto try_split = [&](const std::vector<std::uint8_t>& labels)
            -> std::optional<Separator> {
            bool any_good = false, any_bad = false;
            for (auto l : labels) (l ? any_good : any_bad) = true;
            if (!any_good || !any_bad) return std::nullopt;
            auto sep = fit_separator(points, labels, stats.weights);
            if (!sep || sep->accuracy < params.min_separator_accuracy)
                return std::nullopt;
            return sep;
        };

        auto sep = try_split(label_records(values, delta, stats.weights));
        if (!sep) {
            // The delta labeling can be linearly inseparable (solution
            // components in several corners at once); retry on a pure
            // value clustering so the hierarchy can keep refining.
            constexpr double kInf = std::numeric_limits<double>::infinity();
            sep = try_split(label_records(values, kInf, stats.weights));
        }
        if (!sep) return;

        std::vector<std::size_t> good, bad;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::size_t rec = nodes[static_cast<std::size_t>(id)].members[i];
            if (signed_offset(sep->normal, sep->offset, points[i]) >= 0.0)
                good.push_back(rec);
            else
                bad.push_back(rec);
        }
        if (good.empty() || bad.empty()) return;

        const int good_id = static_cast<int>(nodes.size());
        const int bad_id = good_id + 1;
        {
            auto& n = nodes[static_cast<std::size_t>(id)];
            n.normal = sep->normal;
            n.offset = sep->offset;
            n.good_child = good_id;
            n.bad_child = bad_id;
        }
        PartitionNode g, b;
        g.id = good_id;
        g.parent = id;
        g.members = std::move(good);
        b.id = bad_id;
        b.parent = id;
        b.members = std::move(bad);
        nodes.push_back(std::move(g));
        nodes.push_back(std::move(b));
        build(good_id, depth + 1);
        build(bad_id, depth + 1);
    }
};

}  // namespace

PartitionTree treeify_with_densities(const RecordStore& store,
                                     const std::vector<double>& densities,
                                     double delta, const TreeParams& params) {
    if (store.empty()) throw std::invalid_argument("treeify: empty record store");
    if (densities.size() != store.size())
        throw std::invalid_argument("treeify: densities must align with records");

    TreeBuilder builder{store, densities, delta, params, {}, {}, {}};
    PartitionNode root;
    root.id = 0;
    root.members.resize(store.size());
    std::iota(root.members.begin(), root.members.end(), std::size_t{0});
    builder.nodes.push_back(std::move(root));
    builder.build(0, 0);

    PartitionTree tree;
    tree.nodes_ = std::move(builder.nodes);
    tree.params_ = params;
    return tree;
}

PartitionTree treeify(const RecordStore& store,
                      const std::function<double(const SamplePoint&)>& density,
                      double delta, const TreeParams& params) {
    if (store.empty()) throw std::invalid_argument("treeify: empty record store");
    std::vector<double> densities(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) densities[i] = density(store[i].x);
    return treeify_with_densities(store, densities, delta, params);
}

PartitionTree treeify(const RecordStore& store, const DensityEstimator& estimator,
                      double delta, const TreeParams& params) {
    return treeify(
        store, [&](const SamplePoint& x) { return estimator.density(x); }, delta, params);
}

}  // namespace lambda
