#include "lambda/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "lambda/sampling.hpp"

namespace lambda {

RunTrace random_search(const Objective& objective, const SearchConfig& config) {
    if (!objective.evaluate)
        throw std::invalid_argument("random_search: objective not callable");
    RunTrace trace;
    trace.algorithm = "rs";
    trace.objective = objective.name;
    trace.config = config;

    RecordStore store(objective.bounds);
    std::mt19937_64 rng(config.seed);
    const std::size_t d = objective.dimension;
    SamplePoint p(d);
    for (std::size_t i = 0; i < config.budget; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            p[a] = objective.bounds.lower[a] +
                   u * (objective.bounds.upper[a] - objective.bounds.lower[a]);
        }
        store.append(p, objective(p));
    }
    trace.records = store.records();
    return trace;
}

RunTrace sobol_search(const Objective& objective, const SearchConfig& config) {
    if (!objective.evaluate)
        throw std::invalid_argument("sobol_search: objective not callable");
    RunTrace trace;
    trace.algorithm = "sobol";
    trace.objective = objective.name;
    trace.config = config;

    RecordStore store(objective.bounds);
    const auto pts = scale_to_bounds(sobol_points(objective.dimension, config.budget),
                                     objective.bounds);
    for (const auto& p : pts) store.append(p, objective(p));
    trace.records = store.records();
    return trace;
}

RunTrace run_algorithm(const std::string& name, const Objective& objective, double delta,
                       SearchConfig config) {
    if (name == "lambda") {
        config.ucb = UcbVariant::rho;
        return lambda_run(objective, delta, config);
    }
    if (name == "lambda-ucb1") {
        config.ucb = UcbVariant::ucb1;
        return lambda_run(objective, delta, config);
    }
    if (name == "rs") {
        auto t = random_search(objective, config);
        t.delta = delta;
        return t;
    }
    if (name == "sobol") {
        auto t = sobol_search(objective, config);
        t.delta = delta;
        return t;
    }
    throw std::out_of_range("unknown algorithm '" + name + "'");
}

std::vector<std::string> known_algorithms() {
    return {"lambda", "lambda-ucb1", "rs", "sobol"};
}

namespace {

nlohmann::json config_json(const SearchConfig& c) {
    return nlohmann::json{
        {"budget", c.budget},
        {"init_count", c.init_count},
        {"beam_width", c.beam_width},
        {"samples_per_leaf", c.samples_per_leaf},
        {"c_p", c.c_p},
        {"c_p_range_factor", c.c_p_range_factor},
        {"retreeify_every", c.retreeify_every},
        {"ucb", c.ucb == UcbVariant::rho ? "rho" : "ucb1"},
        {"score_ref", c.score_ref == ScoreReference::root ? "root" : "parent"},
        {"min_split", c.tree.min_split},
        {"max_depth", c.tree.max_depth},
        {"min_separator_accuracy", c.tree.min_separator_accuracy},
        {"density_k", c.density_k},
        {"min_bandwidth_factor", c.min_bandwidth_factor},
        {"density_rebuild_interval", c.density_rebuild_interval},
        {"attempts_per_sample", c.attempts_per_sample},
    };
}

SearchConfig config_from_json(const nlohmann::json& j) {
    SearchConfig c;
    c.budget = j.at("budget").get<std::size_t>();
    c.init_count = j.at("init_count").get<std::size_t>();
    c.beam_width = j.at("beam_width").get<std::size_t>();
    c.samples_per_leaf = j.at("samples_per_leaf").get<std::size_t>();
    c.c_p = j.at("c_p").get<double>();
    c.c_p_range_factor = j.at("c_p_range_factor").get<double>();
    c.retreeify_every = j.at("retreeify_every").get<std::size_t>();
    c.ucb = j.at("ucb").get<std::string>() == "ucb1" ? UcbVariant::ucb1 : UcbVariant::rho;
    c.score_ref = j.at("score_ref").get<std::string>() == "parent"
                      ? ScoreReference::parent_edge
                      : ScoreReference::root;
    c.tree.min_split = j.at("min_split").get<std::size_t>();
    c.tree.max_depth = j.at("max_depth").get<std::size_t>();
    c.tree.min_separator_accuracy = j.at("min_separator_accuracy").get<double>();
    c.density_k = j.at("density_k").get<std::size_t>();
    c.min_bandwidth_factor = j.at("min_bandwidth_factor").get<double>();
    c.density_rebuild_interval = j.at("density_rebuild_interval").get<std::size_t>();
    c.attempts_per_sample = j.at("attempts_per_sample").get<std::size_t>();
    return c;
}

nlohmann::json payload_json(const RunTrace& trace) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : trace.records)
        records.push_back({{"order", r.order}, {"x", r.x}, {"y", r.y}});
    nlohmann::json cfg = config_json(trace.config);
    cfg["algorithm"] = trace.algorithm;
    cfg["objective"] = trace.objective;
    cfg["delta"] = trace.delta;
    return nlohmann::json{{"config", cfg}, {"seed", trace.config.seed}, {"records", records}};
}

}  // namespace

std::string trace_payload_json(const RunTrace& trace) { return payload_json(trace).dump(); }

void write_trace(const std::string& path, const RunTrace& trace) {
    nlohmann::json j = payload_json(trace);
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    j["meta"] = {{"unix_millis",
                  std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace: cannot open '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write_trace: write failed for '" + path + "'");
}

RunTrace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_trace: malformed JSON in '" + path + "': " + e.what());
    }
    RunTrace trace;
    const auto& cfg = j.at("config");
    trace.config = config_from_json(cfg);
    trace.config.seed = j.at("seed").get<std::uint64_t>();
    trace.algorithm = cfg.at("algorithm").get<std::string>();
    trace.objective = cfg.at("objective").get<std::string>();
    trace.delta = cfg.at("delta").get<double>();
    for (const auto& r : j.at("records")) {
        SampleRecord rec;
        rec.order = r.at("order").get<std::size_t>();
        rec.x = r.at("x").get<std::vector<double>>();
        rec.y = r.at("y").get<double>();
        trace.records.push_back(std::move(rec));
    }
    for (std::size_t i = 0; i < trace.records.size(); ++i)
        if (trace.records[i].order != i)
            throw std::runtime_error("read_trace: record order not contiguous");
    return trace;
}

double evaluations_to_threshold(const std::vector<CurvePoint>& curve, double threshold) {
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].f2 < threshold) continue;
        if (i == 0) return static_cast<double>(curve[0].evaluations);
        const auto& lo = curve[i - 1];
        const auto& hi = curve[i];
        const double rise = hi.f2 - lo.f2;
        if (rise <= 0.0) return static_cast<double>(hi.evaluations);
        const double t = (threshold - lo.f2) / rise;
        return static_cast<double>(lo.evaluations) +
               t * static_cast<double>(hi.evaluations - lo.evaluations);
    }
    return std::numeric_limits<double>::infinity();
}

BenchmarkReport run_benchmark(const std::vector<std::string>& algorithms,
                              const Objective& objective, double delta,
                              const GroundTruthGrid& grid, const SearchConfig& base_config,
                              const std::vector<std::size_t>& checkpoints,
                              const std::vector<std::uint64_t>& seeds, double threshold) {
    if (algorithms.empty()) throw std::invalid_argument("run_benchmark: no algorithms");
    if (seeds.empty()) throw std::invalid_argument("run_benchmark: no seeds");

    BenchmarkReport report;
    report.objective = objective.name;
    report.delta = delta;
    report.budget = base_config.budget;
    report.threshold = threshold;
    report.checkpoints = checkpoints;

    for (const auto& algo : algorithms) {
        AlgorithmResult res;
        res.algorithm = algo;
        res.seeds = seeds;
        for (const auto seed : seeds) {
            SearchConfig cfg = base_config;
            cfg.seed = seed;
            try {
                const RunTrace trace = run_algorithm(algo, objective, delta, cfg);
                auto curve = coverage_curve(trace, grid, delta, checkpoints);
                res.evals_to_threshold.push_back(evaluations_to_threshold(curve, threshold));
                res.curves.push_back(std::move(curve));
                res.errors.emplace_back();
            } catch (const std::exception& e) {
                res.curves.emplace_back();
                res.evals_to_threshold.push_back(std::numeric_limits<double>::quiet_NaN());
                res.errors.emplace_back(e.what());
            }
        }
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            double sum = 0.0, lo = 0.0, hi = 0.0;
            std::size_t count = 0;
            for (const auto& curve : res.curves) {
                const auto it = std::find_if(curve.begin(), curve.end(), [&](const CurvePoint& p) {
                    return p.evaluations == checkpoints[c];
                });
                if (it == curve.end()) continue;
                if (count == 0) {
                    lo = hi = it->f2;
                } else {
                    lo = std::min(lo, it->f2);
                    hi = std::max(hi, it->f2);
                }
                sum += it->f2;
                ++count;
            }
            res.mean_f2.push_back(count ? sum / static_cast<double>(count)
                                        : std::numeric_limits<double>::quiet_NaN());
            res.min_f2.push_back(count ? lo : std::numeric_limits<double>::quiet_NaN());
            res.max_f2.push_back(count ? hi : std::numeric_limits<double>::quiet_NaN());
        }
        report.algorithms.push_back(std::move(res));
    }
    return report;
}

namespace {

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;  // JSON has no inf/nan
}

}  // namespace

std::string report_json(const BenchmarkReport& report) {
    nlohmann::json algos = nlohmann::json::array();
    for (const auto& a : report.algorithms) {
        nlohmann::json curves = nlohmann::json::array();
        for (const auto& curve : a.curves) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : curve)
                pts.push_back({{"evaluations", p.evaluations}, {"f2", p.f2}});
            curves.push_back(std::move(pts));
        }
        nlohmann::json evals = nlohmann::json::array();
        for (double v : a.evals_to_threshold) evals.push_back(finite_or_null(v));
        nlohmann::json mean = nlohmann::json::array(), lo = nlohmann::json::array(),
                       hi = nlohmann::json::array();
        for (double v : a.mean_f2) mean.push_back(finite_or_null(v));
        for (double v : a.min_f2) lo.push_back(finite_or_null(v));
        for (double v : a.max_f2) hi.push_back(finite_or_null(v));
        algos.push_back({{"algorithm", a.algorithm},
                         {"seeds", a.seeds},
                         {"curves", curves},
                         {"errors", a.errors},
                         {"evaluations_to_threshold", evals},
                         {"mean_f2", mean},
                         {"min_f2", lo},
                         {"max_f2", hi}});
    }
    return nlohmann::json{{"objective", report.objective},
                          {"delta", report.delta},
                          {"budget", report.budget},
                          {"threshold", report.threshold},
                          {"checkpoints", report.checkpoints},
                          {"algorithms", algos}}
        .dump(2);
}

void write_report(const std::string& path, const BenchmarkReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report: cannot open '" + path + "'");
    out << report_json(report) << '\n';
    if (!out) throw std::runtime_error("write_report: write failed for '" + path + "'");
}

void write_curves_csv(const std::string& path, const BenchmarkReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_curves_csv: cannot open '" + path + "'");
    out.precision(17);
    out << "algorithm,seed,evaluations,f2\n";
    for (const auto& a : report.algorithms)
        for (std::size_t s = 0; s < a.curves.size(); ++s)
            for (const auto& p : a.curves[s])
                out << a.algorithm << ',' << a.seeds[s] << ',' << p.evaluations << ','
                    << p.f2 << '\n';
    if (!out) throw std::runtime_error("write_curves_csv: write failed for '" + path + "'");
}

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_curve_csv: cannot open '" + path + "'");
    out.precision(17);
    out << "evaluations,f2\n";
    for (const auto& p : curve) out << p.evaluations << ',' << p.f2 << '\n';
    if (!out) throw std::runtime_error("write_curve_csv: write failed for '" + path + "'");
}

}  // namespace lambda
