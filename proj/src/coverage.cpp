#include "lambda/coverage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "lambda/kdtree.hpp"

namespace lambda {

double f_beta(const ConfusionMatrix& cm, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("f_beta: beta must be positive and finite");
    if (cm.tp + cm.fn == 0 && cm.tp + cm.fp == 0)
        throw std::domain_error("f_beta: undefined (no positive truths or predictions)");
    const double p = cm.precision();
    const double r = cm.recall();
    if (p == 0.0 && r == 0.0) return 0.0;
    const double b2 = beta * beta;
    return (1.0 + b2) * p * r / (b2 * p + r);
}

GroundTruthGrid GroundTruthGrid::from_objective(const Objective& objective,
                                                std::size_t resolution) {
    if (objective.dimension != 2)
        throw std::invalid_argument("GroundTruthGrid: only 2-D objectives supported");
    if (resolution < 2)
        throw std::invalid_argument("GroundTruthGrid: resolution must be >= 2");
    GroundTruthGrid g;
    auto axis = [&](std::size_t a) {
        std::vector<double> out(resolution);
        const double lo = objective.bounds.lower[a];
        const double hi = objective.bounds.upper[a];
        for (std::size_t i = 0; i < resolution; ++i)
            out[i] = i + 1 == resolution
                         ? hi
                         : lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(resolution - 1);
        return out;
    };
    g.table.xs = axis(0);
    g.table.ys = axis(1);
    g.table.values.resize(resolution * resolution);
    SamplePoint p(2);
    for (std::size_t i = 0; i < resolution; ++i) {
        p[0] = g.table.xs[i];
        for (std::size_t j = 0; j < resolution; ++j) {
            p[1] = g.table.ys[j];
            g.table.values[i * resolution + j] = objective(p);
        }
    }
    return g;
}

GroundTruthGrid GroundTruthGrid::load_csv(const std::string& path) {
    return GroundTruthGrid{GridTable::load_csv(path)};
}

void GroundTruthGrid::save_csv(const std::string& path) const { table.save_csv(path); }

// ---------------------------------------------------------------------------
// Geometric predicates. Plain double evaluation with a rounding-error
// filter; uncertain signs are recomputed in long double, and anything still
// below that error bound is treated as exactly degenerate.

namespace {

constexpr double kOrientErr = 3.3307e-16;      // ~ (3 + 16u) u, u = 2^-53
constexpr double kInCircleErr = 1.1103e-15;    // ~ (10 + 96u) u
constexpr long double kOrientErrL = 1.6264e-19L;
constexpr long double kInCircleErrL = 5.4211e-19L;

int orient_sign(double ax, double ay, double bx, double by, double px, double py) {
    const double detl = (ax - px) * (by - py);
    const double detr = (ay - py) * (bx - px);
    const double det = detl - detr;
    if ((detl > 0.0) != (detr > 0.0) || detl == 0.0 || detr == 0.0)
        return det > 0.0 ? 1 : det < 0.0 ? -1 : 0;
    const double magnitude = std::abs(detl) + std::abs(detr);
    if (std::abs(det) >= kOrientErr * magnitude) return det > 0.0 ? 1 : -1;

    const long double detl2 =
        (static_cast<long double>(ax) - px) * (static_cast<long double>(by) - py);
    const long double detr2 =
        (static_cast<long double>(ay) - py) * (static_cast<long double>(bx) - px);
    const long double det2 = detl2 - detr2;
    const long double mag2 = std::abs(detl2) + std::abs(detr2);
    if (std::abs(det2) >= kOrientErrL * mag2) return det2 > 0.0L ? 1 : -1;
    return 0;
}

template <typename T>
T incircle_det(T ax, T ay, T bx, T by, T cx, T cy, T dx, T dy, T& permanent) {
    const T adx = ax - dx, ady = ay - dy;
    const T bdx = bx - dx, bdy = by - dy;
    const T cdx = cx - dx, cdy = cy - dy;
    const T al = adx * adx + ady * ady;
    const T bl = bdx * bdx + bdy * bdy;
    const T cl = cdx * cdx + cdy * cdy;
    const T det = adx * (bdy * cl - bl * cdy) - ady * (bdx * cl - bl * cdx) +
                  al * (bdx * cdy - bdy * cdx);
    permanent = std::abs(adx) * (std::abs(bdy * cl) + std::abs(bl * cdy)) +
                std::abs(ady) * (std::abs(bdx * cl) + std::abs(bl * cdx)) +
                al * (std::abs(bdx * cdy) + std::abs(bdy * cdx));
    return det;
}

// > 0 iff d is strictly inside the circumcircle of CCW triangle (a, b, c);
// near-cocircular cases resolve to 0 (treated as outside).
int incircle_sign(double ax, double ay, double bx, double by, double cx, double cy,
                  double dx, double dy) {
    double permanent = 0.0;
    const double det = incircle_det(ax, ay, bx, by, cx, cy, dx, dy, permanent);
    if (std::abs(det) >= kInCircleErr * permanent) return det > 0.0 ? 1 : -1;

    long double perm2 = 0.0L;
    const long double det2 =
        incircle_det<long double>(ax, ay, bx, by, cx, cy, dx, dy, perm2);
    if (std::abs(det2) >= kInCircleErrL * perm2) return det2 > 0.0L ? 1 : -1;
    return 0;
}

// ---------------------------------------------------------------------------
// Incremental Bowyer-Watson triangulation inside a large enclosing
// triangle. Vertices 0..2 are the enclosing corners; triangles touching
// them are "exterior" and mark the outside of the sample hull.

struct Triangulation {
    struct Tri {
        int v[3];   // CCW
        int nb[3];  // nb[i] faces the edge opposite v[i]; -1 = open
    };

    std::vector<double> vx, vy, vval;
    std::vector<Tri> tris;
    std::vector<char> alive;
    int interior_live = 0;
    mutable int hint = 0;

    void init(const Bounds& bounds) {
        const double cx = 0.5 * (bounds.lower[0] + bounds.upper[0]);
        const double cy = 0.5 * (bounds.lower[1] + bounds.upper[1]);
        const double span =
            std::max({bounds.upper[0] - bounds.lower[0], bounds.upper[1] - bounds.lower[1], 1.0});
        const double m = 1e4 * span;
        add_vertex(cx - 3.0 * m, cy - m, 0.0);
        add_vertex(cx + 3.0 * m, cy - m, 0.0);
        add_vertex(cx, cy + 3.0 * m, 0.0);
        tris.push_back(Tri{{0, 1, 2}, {-1, -1, -1}});
        alive.push_back(1);
        hint = 0;
    }

    int add_vertex(double x, double y, double val) {
        vx.push_back(x);
        vy.push_back(y);
        vval.push_back(val);
        return static_cast<int>(vx.size()) - 1;
    }

    bool is_interior_tri(const Tri& t) const {
        return t.v[0] >= 3 && t.v[1] >= 3 && t.v[2] >= 3;
    }

    int orient_edge(int a, int b, double px, double py) const {
        return orient_sign(vx[a], vy[a], vx[b], vy[b], px, py);
    }

    // Walks from the hint to an alive triangle whose closure contains p.
    int locate(double px, double py) const {
        int t = hint;
        if (t < 0 || t >= static_cast<int>(tris.size()) || !alive[t]) {
            t = -1;
            for (std::size_t i = 0; i < tris.size(); ++i)
                if (alive[i]) {
                    t = static_cast<int>(i);
                    break;
                }
            if (t < 0) throw std::logic_error("triangulation: no alive triangles");
        }
        const std::size_t max_steps = 4 * tris.size() + 64;
        for (std::size_t step = 0; step < max_steps; ++step) {
            bool moved = false;
            const Tri& tri = tris[t];
            for (int e = 0; e < 3 && !moved; ++e) {
                const int a = tri.v[(e + 1) % 3];
                const int b = tri.v[(e + 2) % 3];
                if (orient_edge(a, b, px, py) < 0) {
                    const int nb = tri.nb[e];
                    if (nb >= 0 && alive[nb]) {
                        t = nb;
                        moved = true;
                    }
                }
            }
            if (!moved) {
                hint = t;
                return t;
            }
        }
        // Degenerate walk; fall back to an exhaustive containment scan.
        for (std::size_t i = 0; i < tris.size(); ++i) {
            if (!alive[i]) continue;
            const Tri& tri = tris[i];
            bool inside = true;
            for (int e = 0; e < 3 && inside; ++e)
                inside = orient_edge(tri.v[(e + 1) % 3], tri.v[(e + 2) % 3], px, py) >= 0;
            if (inside) {
                hint = static_cast<int>(i);
                return static_cast<int>(i);
            }
        }
        throw std::logic_error("triangulation: point not located");
    }

    int edge_index_of_neighbor(int t, int nb) const {
        for (int e = 0; e < 3; ++e)
            if (tris[t].nb[e] == nb) return e;
        return -1;
    }

    // Inserts a point. The caller must have rejected exact duplicates of
    // existing vertices already.
    void insert(double px, double py, double val) {
        const int seed = locate(px, py);

        // Grow the cavity of circumcircle violations outward from the seed.
        std::vector<int> cavity{seed};
        std::vector<int> stack{seed};
        std::unordered_map<int, char> in_cavity{{seed, 1}};
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            for (int e = 0; e < 3; ++e) {
                const int nb = tris[cur].nb[e];
                if (nb < 0 || !alive[nb] || in_cavity.count(nb)) continue;
                const Tri& n = tris[nb];
                if (incircle_sign(vx[n.v[0]], vy[n.v[0]], vx[n.v[1]], vy[n.v[1]],
                                  vx[n.v[2]], vy[n.v[2]], px, py) > 0) {
                    in_cavity[nb] = 1;
                    cavity.push_back(nb);
                    stack.push_back(nb);
                }
            }
        }

        // Validate the cavity boundary: every boundary edge must see the new
        // point strictly on its interior side. Ties pull the neighbor across
        // the edge into the cavity (the point sits on the shared chord);
        // violations eject the offending triangle.
        struct BoundaryEdge {
            int a, b, outside, owner;
        };
        std::vector<BoundaryEdge> boundary;
        auto rebuild_boundary = [&] {
            boundary.clear();
            for (int t : cavity) {
                for (int e = 0; e < 3; ++e) {
                    const int nb = tris[t].nb[e];
                    if (nb >= 0 && alive[nb] && in_cavity.count(nb)) continue;
                    boundary.push_back(BoundaryEdge{tris[t].v[(e + 1) % 3],
                                                    tris[t].v[(e + 2) % 3], nb, t});
                }
            }
        };
        for (std::size_t guard = 0; guard <= tris.size() + cavity.size() + 8; ++guard) {
            rebuild_boundary();
            bool changed = false;
            for (const auto& be : boundary) {
                const int s = orient_edge(be.a, be.b, px, py);
                if (s > 0) continue;
                if (s == 0 && be.outside >= 0 && alive[be.outside]) {
                    in_cavity[be.outside] = 1;
                    cavity.push_back(be.outside);
                    changed = true;
                    break;
                }
                if (s < 0 && be.owner != seed && cavity.size() > 1) {
                    in_cavity.erase(be.owner);
                    cavity.erase(std::find(cavity.begin(), cavity.end(), be.owner));
                    changed = true;
                    break;
                }
                // A zero orientation against an open edge cannot happen with
                // an enclosing super-triangle; a negative seed edge would
                // contradict locate(). Leave the cavity as-is.
            }
            if (!changed) break;
        }
        rebuild_boundary();

        const int vnew = add_vertex(px, py, val);
        for (int t : cavity) {
            if (is_interior_tri(tris[t])) --interior_live;
            alive[t] = 0;
        }

        // Fan the new point to every boundary edge; stitch adjacency via
        // the shared endpoints (from[a] is the fan triangle whose boundary
        // edge starts at a).
        std::unordered_map<int, int> from, to;
        std::vector<int> created;
        created.reserve(boundary.size());
        for (const auto& be : boundary) {
            const int id = static_cast<int>(tris.size());
            tris.push_back(Tri{{vnew, be.a, be.b}, {be.outside, -1, -1}});
            alive.push_back(1);
            if (is_interior_tri(tris.back())) ++interior_live;
            if (be.outside >= 0) {
                const int back = edge_index_of_neighbor(be.outside, be.owner);
                if (back >= 0) tris[be.outside].nb[back] = id;
            }
            from[be.a] = id;
            to[be.b] = id;
            created.push_back(id);
        }
        for (const auto& be : boundary) {
            const int id = from[be.a];
            const auto itf = from.find(be.b);
            const auto itt = to.find(be.a);
            tris[id].nb[1] = itf != from.end() ? itf->second : -1;  // across (b, vnew)
            tris[id].nb[2] = itt != to.end() ? itt->second : -1;    // across (vnew, a)
        }
        hint = created.empty() ? hint : created.front();
    }
};

}  // namespace

// ---------------------------------------------------------------------------

namespace {
// Bit-pattern key of a 2-D point with -0.0 folded onto +0.0.
std::pair<std::uint64_t, std::uint64_t> point_key(double x, double y) {
    return {std::bit_cast<std::uint64_t>(x + 0.0), std::bit_cast<std::uint64_t>(y + 0.0)};
}
struct PointKeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
        return std::hash<std::uint64_t>{}(k.first ^ (k.second * 0x9e3779b97f4a7c15ULL));
    }
};
}  // namespace

struct LinearRegressor::Impl {
    Bounds bounds;
    Triangulation tri;
    std::vector<double> sample_coords;  // flat (x, y) of inserted samples
    std::vector<double> sample_values;
    std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, PointKeyHash> seen;
    mutable KdTree nn;
    mutable bool nn_dirty = true;
};

LinearRegressor::LinearRegressor(Bounds bounds) : impl_(std::make_unique<Impl>()) {
    if (bounds.dimension() != 2)
        throw std::invalid_argument("LinearRegressor: only 2-D supported");
    impl_->bounds = std::move(bounds);
    impl_->tri.init(impl_->bounds);
}

LinearRegressor::LinearRegressor(const LinearRegressor& o)
    : impl_(std::make_unique<Impl>(*o.impl_)) {}
LinearRegressor::LinearRegressor(LinearRegressor&&) noexcept = default;
LinearRegressor& LinearRegressor::operator=(LinearRegressor o) {
    impl_ = std::move(o.impl_);
    return *this;
}
LinearRegressor::~LinearRegressor() = default;

const Bounds& LinearRegressor::bounds() const { return impl_->bounds; }

std::size_t LinearRegressor::sample_count() const { return impl_->sample_values.size(); }

bool LinearRegressor::interpolating() const { return impl_->tri.interior_live > 0; }

void LinearRegressor::insert(const SamplePoint& x, double y) {
    if (x.size() != 2) throw std::invalid_argument("LinearRegressor: expects 2-D points");
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(y))
        throw std::invalid_argument("LinearRegressor: non-finite input");
    // Exact re-evaluations keep their first-seen value (objectives are
    // deterministic, so the value is the same anyway).
    if (!impl_->seen.insert(point_key(x[0], x[1])).second) return;
    impl_->tri.insert(x[0], x[1], y);
    impl_->sample_coords.push_back(x[0]);
    impl_->sample_coords.push_back(x[1]);
    impl_->sample_values.push_back(y);
    impl_->nn_dirty = true;
}

double LinearRegressor::operator()(const SamplePoint& q) const {
    if (q.size() != 2) throw std::invalid_argument("LinearRegressor: expects 2-D queries");
    const Impl& im = *impl_;
    if (im.sample_values.empty())
        throw std::logic_error("LinearRegressor: no samples inserted");

    const int t = im.tri.locate(q[0], q[1]);
    const auto& tri = im.tri.tris[t];
    for (int e = 0; e < 3; ++e) {
        const int v = tri.v[e];
        if (v >= 3 && im.tri.vx[v] == q[0] && im.tri.vy[v] == q[1]) return im.tri.vval[v];
    }

    if (im.tri.is_interior_tri(tri)) {
        const double ax = im.tri.vx[tri.v[0]], ay = im.tri.vy[tri.v[0]];
        const double bx = im.tri.vx[tri.v[1]], by = im.tri.vy[tri.v[1]];
        const double cx = im.tri.vx[tri.v[2]], cy = im.tri.vy[tri.v[2]];
        const double det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        if (det != 0.0) {
            const double la = ((bx - q[0]) * (cy - q[1]) - (by - q[1]) * (cx - q[0])) / det;
            const double lb = ((cx - q[0]) * (ay - q[1]) - (cy - q[1]) * (ax - q[0])) / det;
            const double lc = 1.0 - la - lb;
            return la * im.tri.vval[tri.v[0]] + lb * im.tri.vval[tri.v[1]] +
                   lc * im.tri.vval[tri.v[2]];
        }
    }

    // Outside the hull (or a degenerate sliver): nearest sample value.
    if (im.nn_dirty) {
        im.nn.build(im.sample_coords, 2);
        im.nn_dirty = false;
    }
    std::vector<KdTree::Neighbor> heap;
    im.nn.knn(q, 1, heap);
    return im.sample_values[heap.front().index];
}

LinearRegressor fit_regressor(std::span<const SampleRecord> records, const Bounds& bounds) {
    LinearRegressor reg(bounds);
    for (const auto& r : records) reg.insert(r.x, r.y);
    if (!reg.interpolating())
        throw std::runtime_error(
            "fit_regressor: degenerate geometry (need >= 3 non-collinear samples)");
    return reg;
}

LinearRegressor fit_regressor(const RecordStore& store) {
    return fit_regressor(std::span<const SampleRecord>(store.records()), store.bounds());
}

bool classify(const LinearRegressor& f_hat, const SamplePoint& x, double delta) {
    return f_hat(x) > delta;
}

ConfusionMatrix confusion(const LinearRegressor& f_hat, const GroundTruthGrid& grid,
                          double delta) {
    if (!(f_hat.bounds() == grid.bounds()))
        throw std::invalid_argument("confusion: classifier and grid bounds differ");
    ConfusionMatrix cm;
    const auto& t = grid.table;
    SamplePoint p(2);
    for (std::size_t i = 0; i < t.xs.size(); ++i) {
        p[0] = t.xs[i];
        for (std::size_t j = 0; j < t.ys.size(); ++j) {
            p[1] = t.ys[j];
            const bool truth = t.value_at(i, j) > delta;
            const bool pred = f_hat(p) > delta;
            if (pred && truth)
                ++cm.tp;
            else if (pred && !truth)
                ++cm.fp;
            else if (!pred && truth)
                ++cm.fn;
            else
                ++cm.tn;
        }
    }
    return cm;
}

std::vector<CurvePoint> coverage_curve(const RunTrace& trace, const GroundTruthGrid& grid,
                                       double delta,
                                       const std::vector<std::size_t>& checkpoints) {
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > trace.records.size())
            throw std::invalid_argument("coverage_curve: checkpoint out of range");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw std::invalid_argument("coverage_curve: checkpoints must be ascending");
    }
    std::vector<CurvePoint> curve;
    LinearRegressor reg(grid.bounds());
    std::size_t done = 0;
    for (std::size_t k : checkpoints) {
        for (; done < k; ++done) reg.insert(trace.records[done].x, trace.records[done].y);
        if (!reg.interpolating()) {
            std::cerr << "coverage_curve: checkpoint " << k
                      << " below minimum fit size, skipped\n";
            continue;
        }
        const auto cm = confusion(reg, grid, delta);
        double f2 = 0.0;
        try {
            f2 = f_beta(cm, 2.0);
        } catch (const std::domain_error&) {
            std::cerr << "coverage_curve: F2 undefined at checkpoint " << k
                      << " (no positives), skipped\n";
            continue;
        }
        curve.push_back(CurvePoint{k, f2});
    }
    return curve;
}

}  // namespace lambda
