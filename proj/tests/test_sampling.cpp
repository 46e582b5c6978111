#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "doctest.h"

#include "lambda/sampling.hpp"

using namespace lambda;

namespace {

// Independent Gray-code construction of the first Sobol dimension (the
// base-2 van der Corput sequence): x_n = sum of 2^-(j+1) over set bits j of
// n ^ (n >> 1).
double van_der_corput_gray(std::uint64_t n) {
    const std::uint64_t gray = n ^ (n >> 1);
    double x = 0.0;
    for (unsigned j = 0; j < 32; ++j)
        if ((gray >> j) & 1u) x += std::ldexp(1.0, -static_cast<int>(j) - 1);
    return x;
}

}  // namespace

TEST_CASE("first dimension matches the independent gray-code oracle") {
    const auto pts = sobol_points(1, 64, 0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(pts[i][0] == doctest::Approx(van_der_corput_gray(i)).epsilon(1e-15));

    // The classic pattern from index 1: 0.5, 0.75, 0.25, 0.375.
    const auto skip1 = sobol_points(1, 4, 1);
    CHECK(skip1[0][0] == 0.5);
    CHECK(skip1[1][0] == 0.75);
    CHECK(skip1[2][0] == 0.25);
    CHECK(skip1[3][0] == 0.375);
}

TEST_CASE("first points of the 2-D sequence") {
    const auto pts = sobol_points(2, 8, 0);
    const double expected[8][2] = {{0.0, 0.0},     {0.5, 0.5},     {0.75, 0.25},
                                   {0.25, 0.75},   {0.375, 0.375}, {0.875, 0.875},
                                   {0.625, 0.125}, {0.125, 0.625}};
    for (int i = 0; i < 8; ++i) {
        CHECK(pts[i][0] == expected[i][0]);
        CHECK(pts[i][1] == expected[i][1]);
    }
}

TEST_CASE("count zero yields an empty list") {
    CHECK(sobol_points(3, 0).empty());
}

TEST_CASE("dyadic balance at m=6 for every supported dimension") {
    // Exhaustive count oracle: among the first 2^m points, every dyadic
    // interval [j 2^-k, (j+1) 2^-k) must hold exactly 2^(m-k) points.
    constexpr int m = 6;
    for (std::size_t dim = 1; dim <= SobolSequence::kMaxDimension; ++dim) {
        const auto pts = sobol_points(dim, 1u << m, 0);
        for (std::size_t a = 0; a < dim; ++a) {
            for (int k = 1; k <= m; ++k) {
                std::vector<int> buckets(1u << k, 0);
                for (const auto& p : pts) {
                    CHECK(p[a] >= 0.0);
                    CHECK(p[a] < 1.0);
                    ++buckets[static_cast<std::size_t>(std::ldexp(p[a], k))];
                }
                for (int count : buckets) CHECK(count == (1 << (m - k)));
            }
        }
    }
}

TEST_CASE("2-D stratification is perfect at 256 points") {
    const auto pts = sobol_points(2, 256, 0);
    for (std::size_t a = 0; a < 2; ++a) {
        for (int k = 1; k <= 8; ++k) {
            std::vector<int> buckets(1u << k, 0);
            for (const auto& p : pts) ++buckets[static_cast<std::size_t>(std::ldexp(p[a], k))];
            for (int count : buckets) CHECK(count == (256 >> k));
        }
    }
}

TEST_CASE("skip repositions into the same stream") {
    const auto all = sobol_points(5, 40, 0);
    const auto tail = sobol_points(5, 25, 15);
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(tail[i] == all[i + 15]);
}

TEST_CASE("unsupported dimensions are rejected") {
    CHECK_THROWS_AS(sobol_points(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sobol_points(SobolSequence::kMaxDimension + 1, 1),
                    std::invalid_argument);
    CHECK_NOTHROW(sobol_points(SobolSequence::kMaxDimension, 8));
}

TEST_CASE("scaling maps the unit cube onto bounds") {
    const Bounds b({-10.0, -10.0}, {10.0, 10.0});
    CHECK(scale_to_bounds(SamplePoint{0.0, 0.0}, b) == SamplePoint{-10.0, -10.0});
    CHECK(scale_to_bounds(SamplePoint{0.5, 0.5}, b) == SamplePoint{0.0, 0.0});
    CHECK_THROWS_AS(scale_to_bounds(SamplePoint{0.5}, b), std::invalid_argument);
}

TEST_CASE("scaling round-trips through its inverse") {
    std::mt19937_64 rng(7);
    const Bounds b({-3.0, 2.0, 100.0}, {5.5, 2.5, 101.0});
    for (int i = 0; i < 200; ++i) {
        SamplePoint p(3);
        for (auto& c : p) c = (rng() >> 11) * 0x1.0p-53;
        const auto s = scale_to_bounds(p, b);
        for (std::size_t a = 0; a < 3; ++a) {
            const double back = (s[a] - b.lower[a]) / (b.upper[a] - b.lower[a]);
            CHECK(back == doctest::Approx(p[a]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sample_in_region with no constraints fills the request") {
    const Bounds b({-1.0, -1.0}, {1.0, 1.0});
    const auto pts = sample_in_region(RegionConstraint{}, b, 100, 100, 11);
    CHECK(pts.size() == 100);
    for (const auto& p : pts) CHECK(b.contains(p));
}

TEST_CASE("half-space acceptance rate is about one half") {
    const Bounds b({-1.0, -1.0}, {1.0, 1.0});
    RegionConstraint rc;
    rc.halves.push_back(HalfSpace{{1.0, 0.0}, 0.0, true});  // x1 >= 0
    const auto pts = sample_in_region(rc, b, 10000, 10000, 3);
    const double rate = static_cast<double>(pts.size()) / 10000.0;
    CHECK(rate > 0.4);
    CHECK(rate < 0.6);
    for (const auto& p : pts) CHECK(p[0] >= 0.0);
}

TEST_CASE("contradictory constraints return nothing") {
    const Bounds b({-1.0, -1.0}, {1.0, 1.0});
    RegionConstraint rc;
    rc.halves.push_back(HalfSpace{{1.0, 0.0}, -0.5, true});   // x1 >= 0.5
    rc.halves.push_back(HalfSpace{{1.0, 0.0}, -0.5, false});  // x1 < 0.5
    CHECK(sample_in_region(rc, b, 10, 1000, 5).empty());
}

TEST_CASE("region sampling is reproducible and membership-exact") {
    const Bounds b({0.0, 0.0, 0.0}, {2.0, 4.0, 8.0});
    RegionConstraint rc;
    rc.halves.push_back(HalfSpace{{1.0, -0.5, 0.0}, 0.25, true});
    rc.halves.push_back(HalfSpace{{0.0, 1.0, -0.25}, -0.5, false});
    const auto a = sample_in_region(rc, b, 500, 50000, 99);
    const auto c = sample_in_region(rc, b, 500, 50000, 99);
    CHECK(a == c);
    for (const auto& p : a) {
        CHECK(b.contains(p));
        CHECK(rc.contains(p));
    }
}

TEST_CASE("sample_in_region validates its arguments") {
    const Bounds b({0.0}, {1.0});
    CHECK_THROWS_AS(sample_in_region(RegionConstraint{}, b, 0, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_in_region(RegionConstraint{}, b, 10, 5, 1),
                    std::invalid_argument);
}
