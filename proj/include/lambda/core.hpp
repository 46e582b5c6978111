#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace lambda {

// A point in the search space. Arithmetic is done on raw coordinates
// throughout, so this stays a plain vector.
using SamplePoint = std::vector<double>;

// Axis-aligned search box [lower[i], upper[i]] per dimension.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    Bounds() = default;
    Bounds(std::vector<double> lo, std::vector<double> hi);

    std::size_t dimension() const { return lower.size(); }
    bool contains(const SamplePoint& x) const;

    // Euclidean length of the box diagonal.
    double diameter() const;
    double volume() const;

    bool operator==(const Bounds&) const = default;
};

// One evaluated sample. `order` is the position in the evaluation history.
struct SampleRecord {
    SamplePoint x;
    double y = 0.0;
    std::size_t order = 0;

    bool operator==(const SampleRecord&) const = default;
};

// The evaluation history D. Appends assign contiguous order indices and
// reject points outside the store's bounds or non-finite values.
class RecordStore {
public:
    explicit RecordStore(Bounds bounds);

    const Bounds& bounds() const { return bounds_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const SampleRecord& operator[](std::size_t i) const { return records_[i]; }
    const std::vector<SampleRecord>& records() const { return records_; }

    const SampleRecord& append(SamplePoint x, double y);

private:
    Bounds bounds_;
    std::vector<SampleRecord> records_;
};

// A deterministic black-box objective restricted to `bounds`.
struct Objective {
    std::string name;
    std::size_t dimension = 0;
    Bounds bounds;
    std::function<double(const SamplePoint&)> evaluate;

    // Bounds-checked evaluation; out-of-bounds input is a domain error.
    double operator()(const SamplePoint& x) const;
};

// Holder-Table test function on [-10,10]^2:
//   f(x1,x2) = |sin(x1) cos(x2) exp(|1 - sqrt(x1^2+x2^2)/pi|)|
// Four global maxima (~19.2085) sit near the corners.
double holder_table(const SamplePoint& x);

// A complete rectangular lattice of values over two axes, stored row-major
// with x1 as the major axis. This is the on-disk grid format: CSV with
// header `x1,x2,value`, rows sorted by (x1, x2), axes strictly increasing.
struct GridTable {
    std::vector<double> xs;      // first axis, strictly increasing
    std::vector<double> ys;      // second axis, strictly increasing
    std::vector<double> values;  // xs.size() * ys.size(), row-major

    double value_at(std::size_t i, std::size_t j) const {
        return values[i * ys.size() + j];
    }
    Bounds bounds() const;

    // Bilinear interpolation; exact at lattice nodes. x must be in bounds.
    double interpolate(const SamplePoint& x) const;

    static GridTable load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
};

// Objective backed by a tabulated grid, evaluated by bilinear interpolation.
Objective grid_objective_from_file(const std::string& path);

// Registry. Built-in: "holder-table". "grid:<path>" loads a grid file.
Objective registry_lookup(const std::string& name);
std::vector<std::string> registered_objectives();

}  // namespace lambda
