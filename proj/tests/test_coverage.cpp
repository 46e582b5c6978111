#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "doctest.h"

#include "lambda/bench.hpp"
#include "lambda/coverage.hpp"
#include "lambda/sampling.hpp"

using namespace lambda;

namespace {

SamplePoint random_point(std::mt19937_64& rng, const Bounds& b) {
    SamplePoint p(b.dimension());
    for (std::size_t a = 0; a < p.size(); ++a)
        p[a] = b.lower[a] + (rng() >> 11) * 0x1.0p-53 * (b.upper[a] - b.lower[a]);
    return p;
}

}  // namespace

TEST_CASE("f_beta spot values") {
    CHECK(f_beta(ConfusionMatrix{10, 0, 0, 5}, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

    // p = 1, r = 0.5: (1+4) * 1 * 0.5 / (4 * 1 + 0.5) = 5/9.
    const ConfusionMatrix half{1, 0, 1, 0};
    CHECK(half.precision() == 1.0);
    CHECK(half.recall() == 0.5);
    CHECK(f_beta(half, 2.0) == doctest::Approx(5.0 / 9.0).epsilon(1e-12));

    CHECK(f_beta(ConfusionMatrix{0, 0, 3, 7}, 2.0) == 0.0);
    CHECK(f_beta(ConfusionMatrix{0, 2, 0, 7}, 2.0) == 0.0);
    CHECK_THROWS_AS(f_beta(ConfusionMatrix{0, 0, 0, 9}, 2.0), std::domain_error);
    CHECK_THROWS_AS(f_beta(ConfusionMatrix{1, 0, 0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("regressor reproduces a hand-checked simplex") {
    LinearRegressor reg(Bounds({0.0, 0.0}, {1.0, 1.0}));
    reg.insert({0.0, 0.0}, 0.0);
    reg.insert({1.0, 0.0}, 0.0);
    reg.insert({0.5, 0.9}, 3.0);
    REQUIRE(reg.interpolating());
    // Barycentric average at the centroid: (0 + 0 + 3) / 3 = 1.
    const SamplePoint centroid{(0.0 + 1.0 + 0.5) / 3.0, (0.0 + 0.0 + 0.9) / 3.0};
    CHECK(reg(centroid) == doctest::Approx(1.0).epsilon(1e-12));
    // Identity at the vertices.
    CHECK(reg({0.0, 0.0}) == 0.0);
    CHECK(reg({1.0, 0.0}) == 0.0);
    CHECK(reg({0.5, 0.9}) == 3.0);
}

TEST_CASE("queries far outside the hull take the nearest sample value") {
    LinearRegressor reg(Bounds({-10.0, -10.0}, {10.0, 10.0}));
    reg.insert({-1.0, -1.0}, 4.0);
    reg.insert({1.0, -1.0}, 5.0);
    reg.insert({0.0, 1.0}, 6.0);
    CHECK(reg({-9.0, -9.0}) == 4.0);
    CHECK(reg({9.0, -9.0}) == 5.0);
    CHECK(reg({0.0, 9.5}) == 6.0);
}

TEST_CASE("degenerate sample geometry fails the fit") {
    RecordStore collinear(Bounds({0.0, 0.0}, {1.0, 1.0}));
    for (int i = 0; i <= 10; ++i)
        collinear.append({i / 10.0, i / 10.0}, static_cast<double>(i));
    CHECK_THROWS_AS(fit_regressor(collinear), std::runtime_error);

    RecordStore tiny(Bounds({0.0, 0.0}, {1.0, 1.0}));
    tiny.append({0.2, 0.2}, 1.0);
    tiny.append({0.8, 0.4}, 2.0);
    CHECK_THROWS_AS(fit_regressor(tiny), std::runtime_error);
}

TEST_CASE("interpolation identity at sample points over random datasets") {
    std::mt19937_64 rng(51);
    const Bounds b({-3.0, 2.0}, {4.0, 9.0});
    for (int trial = 0; trial < 8; ++trial) {
        RecordStore store(b);
        const std::size_t n = 10 + rng() % 300;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = random_point(rng, b);
            store.append(p, std::sin(p[0]) * p[1]);
        }
        const auto reg = fit_regressor(store);
        for (const auto& rec : store.records())
            CHECK(reg(rec.x) == doctest::Approx(rec.y).epsilon(1e-9));
    }
}

TEST_CASE("interpolation identity on a structured quasi-random lattice") {
    // Power-of-two Sobol designs put many points on shared dyadic lines,
    // which stresses the degenerate paths of the triangulation.
    const Bounds b({-10.0, -10.0}, {10.0, 10.0});
    RecordStore store(b);
    for (const auto& p : scale_to_bounds(sobol_points(2, 256), b))
        store.append(p, holder_table(p));
    const auto reg = fit_regressor(store);
    for (const auto& rec : store.records())
        CHECK(reg(rec.x) == doctest::Approx(rec.y).epsilon(1e-9));

    // Interpolated values stay within the sampled range (convexity of
    // barycentric weights inside the hull, nearest-fill outside).
    double lo = store[0].y, hi = store[0].y;
    for (const auto& rec : store.records()) {
        lo = std::min(lo, rec.y);
        hi = std::max(hi, rec.y);
    }
    std::mt19937_64 rng(53);
    for (int i = 0; i < 500; ++i) {
        const double v = reg(random_point(rng, b));
        CHECK(v >= lo - 1e-9);
        CHECK(v <= hi + 1e-9);
    }
}

TEST_CASE("interpolation identity on a regular lattice (cocircular stress)") {
    // Every unit cell of a regular grid is cocircular, the worst case for
    // incircle ties. Identity and value-range sanity must survive it.
    const Bounds b({0.0, 0.0}, {1.0, 1.0});
    RecordStore store(b);
    const int n = 20;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = i / double(n - 1);
            const double y = j / double(n - 1);
            store.append({x, y}, x * x + 3.0 * y);
        }
    const auto reg = fit_regressor(store);
    for (const auto& rec : store.records())
        CHECK(reg(rec.x) == doctest::Approx(rec.y).epsilon(1e-9));

    // Bilinear-bounded sanity at cell interiors: piecewise-linear values on
    // any triangulation of a cell lie between the cell's corner extremes.
    std::mt19937_64 rng(67);
    for (int t = 0; t < 300; ++t) {
        const int i = static_cast<int>(rng() % (n - 1));
        const int j = static_cast<int>(rng() % (n - 1));
        const double fx = (rng() >> 11) * 0x1.0p-53;
        const double fy = (rng() >> 11) * 0x1.0p-53;
        const double x = (i + fx) / double(n - 1);
        const double y = (j + fy) / double(n - 1);
        double lo = 1e300, hi = -1e300;
        for (int di = 0; di <= 1; ++di)
            for (int dj = 0; dj <= 1; ++dj) {
                const double cx = (i + di) / double(n - 1);
                const double cy = (j + dj) / double(n - 1);
                lo = std::min(lo, cx * cx + 3.0 * cy);
                hi = std::max(hi, cx * cx + 3.0 * cy);
            }
        const double v = reg({x, y});
        CHECK(v >= lo - 1e-9);
        CHECK(v <= hi + 1e-9);
    }
}

TEST_CASE("exact duplicates are ignored") {
    LinearRegressor reg(Bounds({0.0, 0.0}, {1.0, 1.0}));
    reg.insert({0.1, 0.1}, 1.0);
    reg.insert({0.9, 0.1}, 2.0);
    reg.insert({0.5, 0.8}, 3.0);
    reg.insert({0.1, 0.1}, 1.0);
    CHECK(reg.sample_count() == 3);
    CHECK(reg({0.1, 0.1}) == 1.0);
}

TEST_CASE("classification is strict at delta") {
    LinearRegressor reg(Bounds({0.0, 0.0}, {1.0, 1.0}));
    reg.insert({0.0, 0.0}, 18.0);
    reg.insert({1.0, 0.0}, 18.0);
    reg.insert({0.5, 1.0}, 18.0);
    CHECK_FALSE(classify(reg, {0.5, 0.5}, 18.0));  // f_hat == delta -> 0
    CHECK(classify(reg, {0.5, 0.5}, 17.999999));
}

TEST_CASE("confusion counts match a hand tally on a 4-cell grid") {
    // Truth at the four corners: {F, F, T, T}; predictions: {F, T, T, F}.
    GroundTruthGrid grid;
    grid.table.xs = {0.0, 1.0};
    grid.table.ys = {0.0, 1.0};
    grid.table.values = {0.0, 0.0, 30.0, 30.0};

    LinearRegressor reg(Bounds({0.0, 0.0}, {1.0, 1.0}));
    reg.insert({0.0, 0.0}, 0.0);    // pred F, truth F -> TN
    reg.insert({0.0, 1.0}, 30.0);   // pred T, truth F -> FP
    reg.insert({1.0, 0.0}, 30.0);   // pred T, truth T -> TP
    reg.insert({1.0, 1.0}, 0.0);    // pred F, truth T -> FN
    const auto cm = confusion(reg, grid, 18.0);
    CHECK(cm.tp == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.total() == grid.point_count());
}

TEST_CASE("a classifier matching the truth has no false counts") {
    GroundTruthGrid grid;
    grid.table.xs = {0.0, 1.0};
    grid.table.ys = {0.0, 1.0};
    grid.table.values = {0.0, 0.0, 30.0, 30.0};
    LinearRegressor reg(Bounds({0.0, 0.0}, {1.0, 1.0}));
    reg.insert({0.0, 0.0}, 0.0);
    reg.insert({0.0, 1.0}, 0.0);
    reg.insert({1.0, 0.0}, 30.0);
    reg.insert({1.0, 1.0}, 30.0);
    const auto cm = confusion(reg, grid, 18.0);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);
    CHECK(cm.tp == 2);
    CHECK(cm.tn == 2);
    CHECK(f_beta(cm, 2.0) == 1.0);
}

TEST_CASE("an all-positive classifier has recall 1 and base-rate precision") {
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 64);

    LinearRegressor reg(grid.bounds());
    reg.insert({-10.0, -10.0}, 100.0);
    reg.insert({10.0, -10.0}, 100.0);
    reg.insert({-10.0, 10.0}, 100.0);
    reg.insert({10.0, 10.0}, 100.0);
    const auto cm = confusion(reg, grid, 18.0);
    CHECK(cm.fn == 0);
    CHECK(cm.tn == 0);
    CHECK(cm.recall() == 1.0);
    std::size_t truly_positive = 0;
    for (double v : grid.table.values) truly_positive += v > 18.0 ? 1 : 0;
    CHECK(truly_positive > 0);
    CHECK(cm.precision() ==
          doctest::Approx(double(truly_positive) / double(grid.point_count())));
}

TEST_CASE("confusion equals a naive double-loop tally") {
    std::mt19937_64 rng(61);
    const auto obj = registry_lookup("holder-table");
    for (const std::size_t res : {16u, 33u, 128u}) {
        const auto grid = GroundTruthGrid::from_objective(obj, res);
        RecordStore store(obj.bounds);
        for (int i = 0; i < 200; ++i) {
            const auto p = random_point(rng, obj.bounds);
            store.append(p, obj(p));
        }
        const auto reg = fit_regressor(store);
        const auto cm = confusion(reg, grid, 18.0);

        ConfusionMatrix naive;
        for (std::size_t j = 0; j < grid.table.ys.size(); ++j) {
            for (std::size_t i = 0; i < grid.table.xs.size(); ++i) {
                const SamplePoint p{grid.table.xs[i], grid.table.ys[j]};
                const bool truth = grid.table.value_at(i, j) > 18.0;
                const bool pred = classify(reg, p, 18.0);
                if (pred && truth) ++naive.tp;
                if (pred && !truth) ++naive.fp;
                if (!pred && truth) ++naive.fn;
                if (!pred && !truth) ++naive.tn;
            }
        }
        CHECK(cm == naive);
        CHECK(cm.total() == res * res);
    }
}

TEST_CASE("bounds mismatch is rejected") {
    GroundTruthGrid grid;
    grid.table.xs = {0.0, 1.0};
    grid.table.ys = {0.0, 1.0};
    grid.table.values = {0.0, 0.0, 0.0, 1.0};
    LinearRegressor reg(Bounds({0.0, 0.0}, {2.0, 2.0}));
    reg.insert({0.1, 0.1}, 1.0);
    reg.insert({1.9, 0.1}, 1.0);
    reg.insert({1.0, 1.9}, 1.0);
    CHECK_THROWS_AS(confusion(reg, grid, 0.5), std::invalid_argument);
}

TEST_CASE("a dense design classifies a smooth region almost perfectly") {
    // Solution set of -(x1^2 + x2^2) > -0.25: the open disk of radius 0.5.
    const Objective obj{"bowl", 2, Bounds({-1.0, -1.0}, {1.0, 1.0}),
                        [](const SamplePoint& p) { return -(p[0] * p[0] + p[1] * p[1]); }};
    RecordStore store(obj.bounds);
    for (const auto& p : scale_to_bounds(sobol_points(2, 600), obj.bounds))
        store.append(p, obj(p));
    const auto reg = fit_regressor(store);
    const auto grid = GroundTruthGrid::from_objective(obj, 101);
    std::size_t agree = 0, inside = 0;
    for (std::size_t i = 0; i < 101; ++i)
        for (std::size_t j = 0; j < 101; ++j) {
            if (!(grid.table.value_at(i, j) > -0.25)) continue;
            ++inside;
            const SamplePoint p{grid.table.xs[i], grid.table.ys[j]};
            agree += classify(reg, p, -0.25) ? 1 : 0;
        }
    REQUIRE(inside > 0);
    CHECK(static_cast<double>(agree) / static_cast<double>(inside) >= 0.95);
}

TEST_CASE("coverage curve consistency and notices") {
    const auto obj = registry_lookup("holder-table");
    SearchConfig cfg;
    cfg.budget = 400;
    cfg.init_count = 100;
    RunTrace trace = sobol_search(obj, cfg);
    const auto grid = GroundTruthGrid::from_objective(obj, 64);

    const auto curve = coverage_curve(trace, grid, 18.0, {100, 400});
    REQUIRE(curve.size() == 2);
    CHECK(curve[1].evaluations == 400);

    // The final checkpoint equals a one-shot fit of the whole trace.
    RecordStore store(obj.bounds);
    for (const auto& r : trace.records) store.append(r.x, r.y);
    const auto one_shot = f_beta(confusion(fit_regressor(store), grid, 18.0), 2.0);
    CHECK(curve[1].f2 == doctest::Approx(one_shot).epsilon(1e-12));

    // Quasi-random coverage improves over the long run.
    CHECK(curve[1].f2 > curve[0].f2);

    CHECK(coverage_curve(trace, grid, 18.0, {}).empty());
    CHECK_THROWS_AS(coverage_curve(trace, grid, 18.0, {100, 100}), std::invalid_argument);
    CHECK_THROWS_AS(coverage_curve(trace, grid, 18.0, {401}), std::invalid_argument);

    // Checkpoints below the minimum fit size are skipped, not fatal.
    const auto skipped = coverage_curve(trace, grid, 18.0, {1, 2, 400});
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0].evaluations == 400);
}

TEST_CASE("more ground-truth-consistent samples raise F2 on the whole") {
    // Statistical over seeds, not per instance: the median final F2 of
    // random-search traces beats the median early F2.
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 64);
    std::vector<double> early, late;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        SearchConfig cfg;
        cfg.budget = 600;
        cfg.seed = seed;
        const auto trace = random_search(obj, cfg);
        const auto curve = coverage_curve(trace, grid, 18.0, {100, 600});
        REQUIRE(curve.size() == 2);
        early.push_back(curve[0].f2);
        late.push_back(curve[1].f2);
    }
    std::sort(early.begin(), early.end());
    std::sort(late.begin(), late.end());
    CHECK(late[3] > early[3]);
}

TEST_CASE("ground-truth grid generation hits the exact corners") {
    const auto obj = registry_lookup("holder-table");
    const auto grid = GroundTruthGrid::from_objective(obj, 17);
    CHECK(grid.table.xs.front() == -10.0);
    CHECK(grid.table.xs.back() == 10.0);
    CHECK(grid.table.ys.front() == -10.0);
    CHECK(grid.table.ys.back() == 10.0);
    CHECK(grid.point_count() == 17 * 17);
    CHECK(grid.bounds() == obj.bounds);
}
