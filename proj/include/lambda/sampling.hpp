#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lambda/core.hpp"

namespace lambda {

// Sobol low-discrepancy sequence in [0,1)^d, Gray-code order, 32-bit
// direction numbers from the Joe-Kuo tables.
class SobolSequence {
public:
    static constexpr std::size_t kMaxDimension = 21;
    static constexpr unsigned kBits = 32;

    explicit SobolSequence(std::size_t dimension, std::uint64_t start_index = 0);

    std::size_t dimension() const { return dim_; }
    std::uint64_t next_index() const { return index_; }

    // Emits the point at next_index and advances.
    SamplePoint next();

    // Repositions the stream at an absolute sequence index.
    void seek(std::uint64_t index);

private:
    std::size_t dim_;
    std::uint64_t index_ = 0;
    std::vector<std::array<std::uint32_t, kBits>> dirs_;  // dirs_[dim][bit]
    std::vector<std::uint32_t> state_;                    // Gray-code accumulator
};

// The (skip+i)-th standard Sobol points for i in [0, count).
std::vector<SamplePoint> sobol_points(std::size_t dim, std::size_t count,
                                      std::uint64_t skip = 0);

// Componentwise affine map lower + p * (upper - lower) of unit-cube points.
std::vector<SamplePoint> scale_to_bounds(const std::vector<SamplePoint>& points,
                                         const Bounds& bounds);
SamplePoint scale_to_bounds(const SamplePoint& p, const Bounds& bounds);

// w . x + b, evaluated identically everywhere a separator is tested so that
// membership and routing agree bit-for-bit.
double signed_offset(const std::vector<double>& normal, double offset,
                     const SamplePoint& x);

// One linear half-space test. good_side selects w.x+b >= 0, else w.x+b < 0.
struct HalfSpace {
    std::vector<double> normal;
    double offset = 0.0;
    bool good_side = true;

    bool contains(const SamplePoint& x) const {
        const double s = signed_offset(normal, offset, x);
        return good_side ? s >= 0.0 : s < 0.0;
    }
};

// Conjunction of half-space tests: the root-to-leaf path of separators.
struct RegionConstraint {
    std::vector<HalfSpace> halves;

    bool contains(const SamplePoint& x) const {
        for (const auto& h : halves)
            if (!h.contains(x)) return false;
        return true;
    }
};

// Uniform rejection sampling inside a constrained region. Returns up to
// `count` accepted points; a short (possibly empty) result signals a thin
// region and is not an error.
std::vector<SamplePoint> sample_in_region(const RegionConstraint& constraint,
                                          const Bounds& bounds, std::size_t count,
                                          std::size_t attempts_cap,
                                          std::uint64_t rng_seed);

}  // namespace lambda
