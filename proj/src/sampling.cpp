#include "lambda/sampling.hpp"

#include <bit>
#include <random>
#include <stdexcept>

namespace lambda {

namespace {

// Joe-Kuo direction-number parameters for dimensions 2..21 (dimension 1 is
// the van der Corput sequence and needs no table entry). s is the degree of
// the primitive polynomial, a its encoded inner coefficients, m the initial
// direction integers.
struct DirectionSeed {
    unsigned s;
    std::uint32_t a;
    std::array<std::uint32_t, 7> m;
};

constexpr DirectionSeed kDirectionSeeds[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 3, 5, 23, 17, 115}},
};

constexpr double kInv32 = 1.0 / 4294967296.0;  // 2^-32

}  // namespace

SobolSequence::SobolSequence(std::size_t dimension, std::uint64_t start_index)
    : dim_(dimension) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw std::invalid_argument("SobolSequence: unsupported dimension " +
                                    std::to_string(dimension) + " (max " +
                                    std::to_string(kMaxDimension) + ")");
    dirs_.resize(dim_);
    state_.assign(dim_, 0);

    // First dimension: all m_j = 1.
    for (unsigned j = 0; j < kBits; ++j) dirs_[0][j] = 1u << (kBits - 1 - j);

    for (std::size_t d = 1; d < dim_; ++d) {
        const DirectionSeed& seed = kDirectionSeeds[d - 1];
        auto& v = dirs_[d];
        for (unsigned j = 0; j < seed.s; ++j) v[j] = seed.m[j] << (kBits - 1 - j);
        for (unsigned j = seed.s; j < kBits; ++j) {
            v[j] = v[j - seed.s] ^ (v[j - seed.s] >> seed.s);
            for (unsigned k = 1; k < seed.s; ++k)
                v[j] ^= ((seed.a >> (seed.s - 1 - k)) & 1u) * v[j - k];
        }
    }
    seek(start_index);
}

void SobolSequence::seek(std::uint64_t index) {
    if (index >> kBits)
        throw std::invalid_argument("SobolSequence: index exceeds 2^32");
    index_ = index;
    const std::uint64_t gray = index ^ (index >> 1);
    for (std::size_t d = 0; d < dim_; ++d) {
        std::uint32_t x = 0;
        for (unsigned j = 0; j < kBits; ++j)
            if ((gray >> j) & 1u) x ^= dirs_[d][j];
        state_[d] = x;
    }
}

SamplePoint SobolSequence::next() {
    SamplePoint p(dim_);
    for (std::size_t d = 0; d < dim_; ++d) p[d] = state_[d] * kInv32;
    // Advance: flip the direction number of the lowest zero bit of index_.
    const unsigned c = static_cast<unsigned>(std::countr_one(index_));
    if (c >= kBits)
        throw std::runtime_error("SobolSequence: sequence exhausted");
    for (std::size_t d = 0; d < dim_; ++d) state_[d] ^= dirs_[d][c];
    ++index_;
    return p;
}

std::vector<SamplePoint> sobol_points(std::size_t dim, std::size_t count,
                                      std::uint64_t skip) {
    SobolSequence seq(dim, skip);
    std::vector<SamplePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(seq.next());
    return out;
}

SamplePoint scale_to_bounds(const SamplePoint& p, const Bounds& bounds) {
    if (p.size() != bounds.dimension())
        throw std::invalid_argument("scale_to_bounds: dimension mismatch");
    SamplePoint out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        out[i] = bounds.lower[i] + p[i] * (bounds.upper[i] - bounds.lower[i]);
    return out;
}

std::vector<SamplePoint> scale_to_bounds(const std::vector<SamplePoint>& points,
                                         const Bounds& bounds) {
    std::vector<SamplePoint> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(scale_to_bounds(p, bounds));
    return out;
}

double signed_offset(const std::vector<double>& normal, double offset,
                     const SamplePoint& x) {
    double s = offset;
    for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * x[i];
    return s;
}

std::vector<SamplePoint> sample_in_region(const RegionConstraint& constraint,
                                          const Bounds& bounds, std::size_t count,
                                          std::size_t attempts_cap,
                                          std::uint64_t rng_seed) {
    if (count < 1) throw std::invalid_argument("sample_in_region: count must be >= 1");
    if (attempts_cap < count)
        throw std::invalid_argument("sample_in_region: attempts_cap must be >= count");

    std::mt19937_64 rng(rng_seed);
    const std::size_t d = bounds.dimension();
    std::vector<SamplePoint> out;
    out.reserve(count);
    SamplePoint p(d);
    for (std::size_t attempt = 0; attempt < attempts_cap && out.size() < count; ++attempt) {
        for (std::size_t i = 0; i < d; ++i) {
            // 53-bit mantissa draw in [0,1); portable across standard libraries.
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            p[i] = bounds.lower[i] + u * (bounds.upper[i] - bounds.lower[i]);
        }
        if (constraint.contains(p)) out.push_back(p);
    }
    return out;
}

}  // namespace lambda
