#include "lambda/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace lambda {

Bounds::Bounds(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("Bounds: lower/upper must have equal nonzero length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
            throw std::invalid_argument("Bounds: require finite lower[i] < upper[i]");
    }
}

bool Bounds::contains(const SamplePoint& x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
}

double Bounds::diameter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const double e = upper[i] - lower[i];
        s += e * e;
    }
    return std::sqrt(s);
}

double Bounds::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
}

RecordStore::RecordStore(Bounds bounds) : bounds_(std::move(bounds)) {}

const SampleRecord& RecordStore::append(SamplePoint x, double y) {
    if (!bounds_.contains(x))
        throw std::domain_error("RecordStore::append: point outside bounds");
    if (!std::isfinite(y))
        throw std::invalid_argument("RecordStore::append: non-finite value");
    records_.push_back(SampleRecord{std::move(x), y, records_.size()});
    return records_.back();
}

double Objective::operator()(const SamplePoint& x) const {
    if (x.size() != dimension)
        throw std::invalid_argument("Objective: dimension mismatch for '" + name + "'");
    if (!bounds.contains(x))
        throw std::domain_error("Objective: point outside bounds of '" + name + "'");
    return evaluate(x);
}

double holder_table(const SamplePoint& x) {
    if (x.size() != 2)
        throw std::invalid_argument("holder_table: expects 2-D input");
    if (!(x[0] >= -10.0 && x[0] <= 10.0 && x[1] >= -10.0 && x[1] <= 10.0))
        throw std::domain_error("holder_table: input outside [-10,10]^2");
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return std::abs(std::sin(x[0]) * std::cos(x[1]) *
                    std::exp(std::abs(1.0 - r / M_PI)));
}

Bounds GridTable::bounds() const {
    return Bounds({xs.front(), ys.front()}, {xs.back(), ys.back()});
}

namespace {

// Cell index for q on a strictly increasing axis: largest i with
// axis[i] <= q, clamped so i+1 is valid. Assumes q within [front, back].
std::size_t cell_index(const std::vector<double>& axis, double q) {
    auto it = std::upper_bound(axis.begin(), axis.end(), q);
    std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
    if (i + 1 >= axis.size()) i = axis.size() - 2;
    return i;
}

}  // namespace

double GridTable::interpolate(const SamplePoint& x) const {
    if (x.size() != 2)
        throw std::invalid_argument("GridTable::interpolate: expects 2-D input");
    if (!(x[0] >= xs.front() && x[0] <= xs.back() && x[1] >= ys.front() && x[1] <= ys.back()))
        throw std::domain_error("GridTable::interpolate: point outside grid");
    const std::size_t i = cell_index(xs, x[0]);
    const std::size_t j = cell_index(ys, x[1]);
    const double t = (x[0] - xs[i]) / (xs[i + 1] - xs[i]);
    const double u = (x[1] - ys[j]) / (ys[j + 1] - ys[j]);
    return (1.0 - t) * (1.0 - u) * value_at(i, j) + t * (1.0 - u) * value_at(i + 1, j) +
           (1.0 - t) * u * value_at(i, j + 1) + t * u * value_at(i + 1, j + 1);
}

GridTable GridTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("grid file: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("grid file: empty file");
    // Tolerate trailing CR from CRLF files.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x1,x2,value")
        throw std::runtime_error("grid file: expected header 'x1,x2,value'");

    std::vector<std::array<double, 3>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::array<double, 3> row{};
        char c1 = 0, c2 = 0;
        if (!(ss >> row[0] >> c1 >> row[1] >> c2 >> row[2]) || c1 != ',' || c2 != ',')
            throw std::runtime_error("grid file: malformed row at line " + std::to_string(lineno));
        std::string rest;
        if (ss >> rest)
            throw std::runtime_error("grid file: trailing data at line " + std::to_string(lineno));
        if (!std::isfinite(row[0]) || !std::isfinite(row[1]) || !std::isfinite(row[2]))
            throw std::runtime_error("grid file: non-finite entry at line " + std::to_string(lineno));
        rows.push_back(row);
    }
    if (rows.empty()) throw std::runtime_error("grid file: no data rows");

    GridTable g;
    // Leading block of rows sharing xs[0] defines the second axis.
    g.ys.push_back(rows[0][1]);
    for (std::size_t r = 1; r < rows.size() && rows[r][0] == rows[0][0]; ++r)
        g.ys.push_back(rows[r][1]);
    const std::size_t ny = g.ys.size();
    if (rows.size() % ny != 0)
        throw std::runtime_error("grid file: incomplete lattice (row count not divisible)");
    const std::size_t nx = rows.size() / ny;
    if (nx < 2 || ny < 2)
        throw std::runtime_error("grid file: need at least a 2x2 lattice");
    for (std::size_t j = 1; j < ny; ++j) {
        if (!(g.ys[j - 1] < g.ys[j]))
            throw std::runtime_error("grid file: x2 axis not strictly increasing");
    }
    g.values.resize(nx * ny);
    for (std::size_t i = 0; i < nx; ++i) {
        const double xi = rows[i * ny][0];
        if (i > 0 && !(g.xs.back() < xi))
            throw std::runtime_error("grid file: x1 axis not strictly increasing");
        g.xs.push_back(xi);
        for (std::size_t j = 0; j < ny; ++j) {
            const auto& row = rows[i * ny + j];
            if (row[0] != xi || row[1] != g.ys[j])
                throw std::runtime_error("grid file: rows do not form a rectangular lattice");
            g.values[i * ny + j] = row[2];
        }
    }
    return g;
}

void GridTable::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("grid file: cannot write '" + path + "'");
    out << "x1,x2,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ys.size(); ++j)
            out << xs[i] << ',' << ys[j] << ',' << value_at(i, j) << '\n';
    if (!out) throw std::runtime_error("grid file: write failed for '" + path + "'");
}

Objective grid_objective_from_file(const std::string& path) {
    auto grid = std::make_shared<GridTable>(GridTable::load_csv(path));
    Objective obj;
    obj.name = "grid:" + path;
    obj.dimension = 2;
    obj.bounds = grid->bounds();
    obj.evaluate = [grid](const SamplePoint& x) { return grid->interpolate(x); };
    return obj;
}

Objective registry_lookup(const std::string& name) {
    if (name == "holder-table") {
        Objective obj;
        obj.name = "holder-table";
        obj.dimension = 2;
        obj.bounds = Bounds({-10.0, -10.0}, {10.0, 10.0});
        obj.evaluate = [](const SamplePoint& x) { return holder_table(x); };
        return obj;
    }
    if (name.rfind("grid:", 0) == 0 && name.size() > 5)
        return grid_objective_from_file(name.substr(5));
    throw std::out_of_range("unknown objective '" + name + "'");
}

std::vector<std::string> registered_objectives() {
    return {"holder-table", "grid:<path>"};
}

}  // namespace lambda
