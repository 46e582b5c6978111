#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lambda/core.hpp"
#include "lambda/search.hpp"

namespace lambda {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    double precision() const { return tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0; }
    double recall() const { return tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0; }

    bool operator==(const ConfusionMatrix&) const = default;
};

// F_beta = (1+beta^2) p r / (beta^2 p + r); 0 when p = r = 0. Undefined
// (throws) when there are neither positive truths nor positive predictions.
double f_beta(const ConfusionMatrix& cm, double beta = 2.0);

// Exact objective values on a rectangular lattice, used only for scoring.
struct GroundTruthGrid {
    GridTable table;

    Bounds bounds() const { return table.bounds(); }
    std::size_t point_count() const { return table.values.size(); }

    static GroundTruthGrid from_objective(const Objective& objective,
                                          std::size_t resolution);
    static GroundTruthGrid load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
};

// Piecewise-linear interpolation on an incrementally built triangulation of
// the 2-D sample points; queries outside the convex hull take the nearest
// sample's value. Reproduces sample values exactly at sample points.
class LinearRegressor {
public:
    explicit LinearRegressor(Bounds bounds);
    LinearRegressor(const LinearRegressor&);
    LinearRegressor(LinearRegressor&&) noexcept;
    LinearRegressor& operator=(LinearRegressor);
    ~LinearRegressor();

    const Bounds& bounds() const;
    std::size_t sample_count() const;
    // True once the triangulation has at least one interior triangle.
    bool interpolating() const;

    // Exact duplicates of an existing sample point are ignored.
    void insert(const SamplePoint& x, double y);

    double operator()(const SamplePoint& q) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Builds the interpolating regressor from the full history. Throws when the
// geometry is degenerate (fewer than 3 distinct points, or all collinear).
LinearRegressor fit_regressor(const RecordStore& store);
LinearRegressor fit_regressor(std::span<const SampleRecord> records, const Bounds& bounds);

// Strict superlevel decision: f_hat(x) > delta.
bool classify(const LinearRegressor& f_hat, const SamplePoint& x, double delta);

// Prediction-vs-truth counts over every grid point.
ConfusionMatrix confusion(const LinearRegressor& f_hat, const GroundTruthGrid& grid,
                          double delta);

struct CurvePoint {
    std::size_t evaluations = 0;
    double f2 = 0.0;
};

// F2 after the first k records, for each checkpoint k. Checkpoints too
// small to fit are skipped with a notice on stderr.
std::vector<CurvePoint> coverage_curve(const RunTrace& trace, const GroundTruthGrid& grid,
                                       double delta,
                                       const std::vector<std::size_t>& checkpoints);

}  // namespace lambda
