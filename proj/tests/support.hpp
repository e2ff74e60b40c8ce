#pragma once

#include "wikinav/graph.hpp"
#include "wikinav/ingest.hpp"

#include <map>
#include <random>
#include <set>
#include <vector>

namespace testing {

inline std::vector<wikinav::Edge> random_edges(std::size_t n, double p, std::mt19937_64& rng, bool self_loops = false) {
    std::bernoulli_distribution keep(p);
    std::vector<wikinav::Edge> edges;
    for (wikinav::NodeId i = 0; i < n; ++i)
        for (wikinav::NodeId j = 0; j < n; ++j)
            if ((i != j || self_loops) && keep(rng)) edges.push_back({i, j});
    return edges;
}

inline wikinav::LinkGraph random_graph(std::size_t n, double p, std::mt19937_64& rng, bool self_loops = false) {
    const auto e = random_edges(n, p, rng, self_loops);
    return wikinav::build_graph(e, n);
}

// Every node gets between lo and hi distinct out-links.
inline wikinav::LinkGraph random_out_graph(std::size_t n, std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> deg(lo, hi);
    std::uniform_int_distribution<wikinav::NodeId> node(0, static_cast<wikinav::NodeId>(n - 1));
    std::vector<wikinav::Edge> edges;
    for (wikinav::NodeId i = 0; i < n; ++i) {
        const std::size_t d = std::min(deg(rng), n - 1);
        std::set<wikinav::NodeId> targets;
        while (targets.size() < d) {
            const auto t = node(rng);
            if (t != i) targets.insert(t);
        }
        for (auto t : targets) edges.push_back({i, t});
    }
    return wikinav::build_graph(edges, n);
}

// Each node with out-links emits `per_node` clicks, choosing out-link e with
// probability proportional to weights[e]. Unused links get no entry.
inline wikinav::TransitionLog sample_transitions(const wikinav::LinkGraph& g, const std::vector<double>& weights,
                                                 std::size_t per_node, std::mt19937_64& rng) {
    wikinav::TransitionLog log;
    log.threshold = 1;
    for (wikinav::NodeId i = 0; i < g.node_count(); ++i) {
        const auto out = g.out_neighbors(i);
        if (out.empty()) continue;
        std::vector<double> w;
        for (auto j : out) w.push_back(weights[*g.edge_id(i, j)]);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        std::vector<std::uint64_t> c(out.size(), 0);
        for (std::size_t k = 0; k < per_node; ++k) ++c[pick(rng)];
        for (std::size_t k = 0; k < out.size(); ++k)
            if (c[k] > 0) log.entries.push_back({i, out[k], c[k]});
    }
    return log;
}

// Directed graph with heavy-tailed in-degrees: node i links to between lo and
// hi earlier-or-later targets picked proportionally to (in-degree + 1).
inline wikinav::LinkGraph random_pa_graph(std::size_t n, std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> deg(lo, hi);
    std::vector<wikinav::NodeId> pool; // one slot per node plus one per received link
    for (wikinav::NodeId i = 0; i < n; ++i) pool.push_back(i);
    std::vector<wikinav::Edge> edges;
    for (wikinav::NodeId i = 0; i < n; ++i) {
        const std::size_t d = std::min(deg(rng), n - 1);
        std::set<wikinav::NodeId> targets;
        while (targets.size() < d) {
            const auto t = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
            if (t != i) targets.insert(t);
        }
        for (auto t : targets) {
            edges.push_back({i, t});
            pool.push_back(t);
        }
    }
    return wikinav::build_graph(edges, n);
}

// Random walk that follows out-link e with probability proportional to
// weights[e] and restarts at a uniform node with probability 1 - alpha or at
// a dead end. Only link traversals are logged.
inline wikinav::TransitionLog simulate_surfer(const wikinav::LinkGraph& g, const std::vector<double>& weights,
                                              double alpha, std::size_t steps, std::mt19937_64& rng) {
    const std::size_t n = g.node_count();
    std::vector<std::discrete_distribution<std::size_t>> choose(n);
    for (wikinav::NodeId i = 0; i < n; ++i) {
        std::vector<double> w;
        for (std::size_t e = g.out_begin(i); e < g.out_end(i); ++e) w.push_back(weights[e]);
        if (!w.empty()) choose[i] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
    std::uniform_int_distribution<wikinav::NodeId> any(0, static_cast<wikinav::NodeId>(n - 1));
    std::bernoulli_distribution follow(alpha);
    std::map<std::pair<wikinav::NodeId, wikinav::NodeId>, std::uint64_t> counts;
    wikinav::NodeId at = any(rng);
    for (std::size_t s = 0; s < steps; ++s) {
        if (g.out_degree(at) == 0 || !follow(rng)) {
            at = any(rng);
            continue;
        }
        const auto next = g.out_neighbors(at)[choose[at](rng)];
        ++counts[{at, next}];
        at = next;
    }
    wikinav::TransitionLog log;
    log.threshold = 1;
    for (const auto& [k, c] : counts) log.entries.push_back({k.first, k.second, c});
    return log;
}

} // namespace testing
