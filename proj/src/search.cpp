#include "lambda/search.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "lambda/sampling.hpp"

namespace lambda {

void SearchConfig::validate() const {
    if (budget < 1) throw std::invalid_argument("SearchConfig: budget must be >= 1");
    if (init_count < 1 || init_count > budget)
        throw std::invalid_argument("SearchConfig: require 1 <= init_count <= budget");
    if (beam_width < 1) throw std::invalid_argument("SearchConfig: beam_width must be >= 1");
    if (samples_per_leaf < 1)
        throw std::invalid_argument("SearchConfig: samples_per_leaf must be >= 1");
    if (retreeify_every < 1)
        throw std::invalid_argument("SearchConfig: retreeify_every must be >= 1");
    if (c_p < 0.0 && c_p_range_factor < 0.0)
        throw std::invalid_argument("SearchConfig: c_p_range_factor must be >= 0");
    if (tree.min_split < 2) throw std::invalid_argument("SearchConfig: min_split must be >= 2");
    if (density_k < 1) throw std::invalid_argument("SearchConfig: density_k must be >= 1");
    if (!(min_bandwidth_factor > 0.0))
        throw std::invalid_argument("SearchConfig: min_bandwidth_factor must be > 0");
    if (density_rebuild_interval < 1)
        throw std::invalid_argument("SearchConfig: density_rebuild_interval must be >= 1");
    if (attempts_per_sample < 1)
        throw std::invalid_argument("SearchConfig: attempts_per_sample must be >= 1");
}

DensityParams SearchConfig::density_params(const Bounds& bounds) const {
    DensityParams p;
    p.k = density_k;
    p.min_bandwidth = min_bandwidth_factor * bounds.diameter();
    p.rebuild_interval = density_rebuild_interval;
    return p;
}

double ucb1(const PartitionNode& parent, const PartitionNode& child, double c_p) {
    if (parent.n < 1 || child.n < 1)
        throw std::invalid_argument("ucb1: nodes must have visits");
    const double n_a = static_cast<double>(parent.n);
    const double n_b = static_cast<double>(child.n);
    return child.mean_y + 2.0 * c_p * std::sqrt(2.0 * std::log(n_a) / n_b);
}

double ucb_rho(const PartitionNode& parent, const PartitionNode& child, double c_p) {
    if (!(parent.rho > 0.0) || !(child.rho > 0.0))
        throw std::invalid_argument("ucb_rho: densities must be > 0");
    return child.v + c_p * std::log(parent.rho / child.rho);
}

std::vector<ScoredLeaf> rank_leaves(const PartitionTree& tree, double c_p,
                                    UcbVariant variant, ScoreReference ref) {
    std::vector<ScoredLeaf> out;
    if (tree.node_count() == 1) {
        const auto& root = tree.root();
        out.push_back({root.id, variant == UcbVariant::rho ? root.v : root.mean_y});
        return out;
    }
    for (int id : tree.leaf_ids()) {
        const auto& leaf = tree.node(id);
        const auto& against =
            ref == ScoreReference::root ? tree.root() : tree.node(leaf.parent);
        const double score = variant == UcbVariant::rho ? ucb_rho(against, leaf, c_p)
                                                        : ucb1(against, leaf, c_p);
        out.push_back({id, score});
    }
    std::sort(out.begin(), out.end(), [](const ScoredLeaf& a, const ScoredLeaf& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    return out;
}

std::vector<ScoredLeaf> select_beam(const PartitionTree& tree, double c_p,
                                    std::size_t beam_width, UcbVariant variant,
                                    ScoreReference ref) {
    if (beam_width < 1) throw std::invalid_argument("select_beam: beam_width must be >= 1");
    auto ranked = rank_leaves(tree, c_p, variant, ref);
    if (ranked.size() > beam_width) ranked.resize(beam_width);
    return ranked;
}

SimulationResult simulate_and_evaluate(const Objective& objective,
                                       const std::vector<ScoredLeaf>& ranked,
                                       const PartitionTree& tree,
                                       const SearchConfig& config, RecordStore& store,
                                       std::mt19937_64& rng, std::size_t remaining) {
    if (remaining == 0)
        throw std::invalid_argument("simulate_and_evaluate: no remaining budget");
    SimulationResult result;
    std::size_t productive = 0;
    std::size_t appended = 0;
    const std::size_t cap = config.attempts_per_sample * config.samples_per_leaf;
    for (const auto& cand : ranked) {
        if (productive >= config.beam_width || appended >= remaining) break;
        const std::size_t want = std::min(config.samples_per_leaf, remaining - appended);
        const auto constraint = tree.constraint_for(cand.id);
        const auto pts = sample_in_region(constraint, store.bounds(), want,
                                          std::max(cap, want), rng());
        if (pts.empty()) continue;  // starved region; fall back to the next rank
        ++productive;
        result.used_leaves.push_back(cand);
        for (const auto& p : pts) {
            const double y = objective(p);
            result.new_records.push_back(store.append(p, y).order);
            ++appended;
        }
    }
    if (result.new_records.empty()) {
        // Every ranked region starved within its attempt cap; keep the
        // budget loop alive with unconstrained draws.
        const std::size_t want = std::min(config.samples_per_leaf, remaining);
        const auto pts =
            sample_in_region(RegionConstraint{}, store.bounds(), want, want, rng());
        for (const auto& p : pts) {
            const double y = objective(p);
            result.new_records.push_back(store.append(p, y).order);
        }
    }
    return result;
}

namespace {

// Inserts records along their root-to-leaf paths and refreshes statistics
// of affected nodes from densities aligned with the full record store.
void insert_and_refresh(PartitionTree& tree, const std::vector<std::size_t>& new_records,
                        const RecordStore& store, const std::vector<double>& densities) {
    std::vector<int> affected;
    for (std::size_t rec : new_records) {
        const int leaf = tree.route(store[rec].x);
        for (int id : tree.path_to(leaf)) {
            tree.node_mut(id).members.push_back(rec);
            affected.push_back(id);
        }
    }
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    std::vector<double> values, dens;
    for (int id : affected) {
        auto& node = tree.node_mut(id);
        values.clear();
        dens.clear();
        for (std::size_t m : node.members) {
            values.push_back(store[m].y);
            dens.push_back(densities[m]);
        }
        const NodeStats s = node_statistics(values, dens);
        node.n = node.members.size();
        node.v = s.v;
        node.rho = s.rho;
        node.mean_y = s.mean_y;
    }
}

std::vector<double> density_cache(const RecordStore& store,
                                  const DensityEstimator& estimator) {
    std::vector<double> out(store.size());
    for (std::size_t i = 0; i < store.size(); ++i)
        out[i] = estimator.density(store[i].x);
    return out;
}

}  // namespace

void RecordDensityCache::full_refresh(const RecordStore& store,
                                      const DensityEstimator& estimator) {
    densities_.resize(store.size());
    bandwidths_.resize(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        bandwidths_[i] = estimator.bandwidth(store[i].x);
        densities_[i] = estimator.density(store[i].x);
    }
    rebuilds_seen_ = estimator.rebuild_count();
}

void RecordDensityCache::apply_new_records(const RecordStore& store,
                                           const DensityEstimator& estimator,
                                           const std::vector<std::size_t>& new_records) {
    if (estimator.rebuild_count() != rebuilds_seen_ || densities_.empty()) {
        // An index rebuild changes summation order, so cached values are no
        // longer bit-reproducible; start over.
        full_refresh(store, estimator);
        return;
    }
    const std::size_t old_count = densities_.size();
    densities_.resize(store.size());
    bandwidths_.resize(store.size());

    const double cut = DensityEstimator::kCutoffBandwidths;
    for (std::size_t i = 0; i < old_count; ++i) {
        const double r_sq = cut * cut * bandwidths_[i] * bandwidths_[i];
        bool affected = false;
        const auto& x = store[i].x;
        for (std::size_t rec : new_records) {
            const auto& p = store[rec].x;
            double d2 = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a) {
                const double d = x[a] - p[a];
                d2 += d * d;
            }
            if (d2 <= r_sq) {
                affected = true;
                break;
            }
        }
        if (affected) {
            bandwidths_[i] = estimator.bandwidth(store[i].x);
            densities_[i] = estimator.density(store[i].x);
        }
    }
    for (std::size_t rec : new_records) {
        bandwidths_[rec] = estimator.bandwidth(store[rec].x);
        densities_[rec] = estimator.density(store[rec].x);
    }
}

void backpropagate(PartitionTree& tree, const std::vector<std::size_t>& new_records,
                   const RecordStore& store, DensityEstimator& estimator) {
    std::vector<SamplePoint> xs;
    xs.reserve(new_records.size());
    for (std::size_t rec : new_records) xs.push_back(store[rec].x);
    estimator.add_points(xs);
    if (new_records.empty()) return;
    insert_and_refresh(tree, new_records, store, density_cache(store, estimator));
}

RunTrace lambda_run(const Objective& objective, double delta, const SearchConfig& config) {
    config.validate();
    if (!objective.evaluate) throw std::invalid_argument("lambda_run: objective not callable");

    RunTrace trace;
    trace.algorithm = config.ucb == UcbVariant::rho ? "lambda" : "lambda-ucb1";
    trace.objective = objective.name;
    trace.delta = delta;
    trace.config = config;

    RecordStore store(objective.bounds);
    DensityEstimator estimator(objective.dimension,
                               config.density_params(objective.bounds));

    const auto init =
        scale_to_bounds(sobol_points(objective.dimension, config.init_count), objective.bounds);
    std::vector<SamplePoint> init_xs;
    init_xs.reserve(init.size());
    for (const auto& p : init) {
        store.append(p, objective(p));
        init_xs.push_back(p);
    }
    estimator.add_points(init_xs);
    RecordDensityCache cache;
    cache.full_refresh(store, estimator);

    std::mt19937_64 rng(config.seed);
    std::optional<PartitionTree> tree;
    std::size_t iteration = 0;
    double y_min = 0.0, y_max = 0.0;
    for (std::size_t i = 0; i < store.size(); ++i) {
        y_min = i == 0 ? store[i].y : std::min(y_min, store[i].y);
        y_max = i == 0 ? store[i].y : std::max(y_max, store[i].y);
    }

    while (store.size() < config.budget) {
        if (!tree || iteration % config.retreeify_every == 0)
            tree = treeify_with_densities(store, cache.densities(), delta, config.tree);

        const double c_p =
            config.c_p >= 0.0 ? config.c_p : config.c_p_range_factor * (y_max - y_min);
        const auto ranked = rank_leaves(*tree, c_p, config.ucb, config.score_ref);
        const auto sim = simulate_and_evaluate(objective, ranked, *tree, config, store,
                                               rng, config.budget - store.size());

        for (std::size_t rec : sim.new_records) {
            y_min = std::min(y_min, store[rec].y);
            y_max = std::max(y_max, store[rec].y);
        }

        // Backpropagation with the density cache shared with the next
        // treeify: the estimator state is identical at both points.
        std::vector<SamplePoint> xs;
        xs.reserve(sim.new_records.size());
        for (std::size_t rec : sim.new_records) xs.push_back(store[rec].x);
        estimator.add_points(xs);
        cache.apply_new_records(store, estimator, sim.new_records);
        insert_and_refresh(*tree, sim.new_records, store, cache.densities());

        IterationEvent ev;
        ev.iteration = iteration;
        ev.tree_nodes = tree->node_count();
        ev.tree_leaves = tree->leaf_count();
        for (const auto& leaf : sim.used_leaves) {
            ev.selected_leaves.push_back(leaf.id);
            ev.selected_scores.push_back(leaf.score);
        }
        ev.evaluations_after = store.size();
        trace.events.push_back(std::move(ev));
        ++iteration;
    }

    trace.records = store.records();
    return trace;
}

}  // namespace lambda
