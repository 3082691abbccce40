#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"

namespace treeflow {

// Flux-oriented view of a network: i -> j where Q_ij > 0, j -> i where
// Q_ij < 0; edges with |Q| at or below the cutoff are dropped entirely.
struct OrientedNetwork {
    int vertex_count = 0;
    std::vector<std::pair<int, int>> directed_edges;  // (from, to)
};

inline std::vector<std::vector<int>> out_adjacency(const OrientedNetwork& onet) {
    std::vector<std::vector<int>> adj(onet.vertex_count);
    for (auto [from, to] : onet.directed_edges) adj[from].push_back(to);
    return adj;
}

// Exact tree fluxes have exact zeros, but convex-baseline fluxes only reach
// numerical zero; the default cutoff scales with the source magnitudes.
inline double default_flux_zero_tol(const Network& net) {
    return 1e-12 * max_abs_source(net);
}

inline OrientedNetwork orient_by_flux(const Network& net, const FluxAssignment& q,
                                      double zero_tol) {
    OrientedNetwork onet;
    onet.vertex_count = net.vertex_count;
    for (int e = 0; e < net.edge_count(); ++e) {
        const double flux = q.per_edge_flux[e];
        auto [i, j] = net.edges[e];
        if (flux > zero_tol) {
            onet.directed_edges.emplace_back(i, j);
        } else if (flux < -zero_tol) {
            onet.directed_edges.emplace_back(j, i);
        }
    }
    return onet;
}

inline OrientedNetwork orient_by_flux(const Network& net, const FluxAssignment& q) {
    return orient_by_flux(net, q, default_flux_zero_tol(net));
}

struct GrcReport {
    std::vector<double> local_cr;  // per-vertex local reaching centrality
    double cr_max = 0.0;
    double grc = 0.0;
};

// Fraction of the other vertices reachable from `vertex` along directed edges.
inline double local_reaching_centrality(const OrientedNetwork& onet, int vertex) {
    if (onet.vertex_count < 2) {
        throw std::domain_error("local_reaching_centrality: undefined for fewer than 2 vertices");
    }
    if (vertex < 0 || vertex >= onet.vertex_count) {
        throw std::invalid_argument("local_reaching_centrality: invalid vertex id");
    }
    const auto adj = out_adjacency(onet);
    return static_cast<double>(reachable_set(adj, vertex).size()) /
           static_cast<double>(onet.vertex_count - 1);
}

// Global reaching centrality: the mean shortfall of the local reaching
// centralities below their maximum, normalized by |V| - 1. 0 for perfectly
// flat orientations, 1 for a maximal hierarchy (out-star).
inline GrcReport grc(const OrientedNetwork& onet) {
    const int n = onet.vertex_count;
    if (n < 2) throw std::domain_error("grc: undefined for fewer than 2 vertices");
    const auto adj = out_adjacency(onet);
    GrcReport report;
    report.local_cr.reserve(n);
    for (int v = 0; v < n; ++v) {
        const double cr =
            static_cast<double>(reachable_set(adj, v).size()) / static_cast<double>(n - 1);
        report.local_cr.push_back(cr);
        report.cr_max = std::max(report.cr_max, cr);
    }
    double acc = 0.0;
    for (double cr : report.local_cr) acc += report.cr_max - cr;
    report.grc = acc / static_cast<double>(n - 1);
    return report;
}

// Weighted variant: reachable source/sink mass |S_j| normalized by the total
// sink mass. Coincides with the unweighted measure on loop-free networks
// with a single source and uniformly distributed sinks.
inline double weighted_local_reaching(const OrientedNetwork& onet, int vertex,
                                      const std::vector<double>& sources) {
    if (onet.vertex_count < 2) {
        throw std::domain_error("weighted_local_reaching: undefined for fewer than 2 vertices");
    }
    if (vertex < 0 || vertex >= onet.vertex_count) {
        throw std::invalid_argument("weighted_local_reaching: invalid vertex id");
    }
    double sink_mass = 0.0;
    for (double s : sources) {
        if (s < 0.0) sink_mass -= s;
    }
    if (sink_mass == 0.0) return 0.0;
    const auto adj = out_adjacency(onet);
    double reached = 0.0;
    for (int w : reachable_set(adj, vertex)) reached += std::fabs(sources[w]);
    return reached / sink_mass;
}

inline GrcReport grc_weighted(const OrientedNetwork& onet, const std::vector<double>& sources) {
    const int n = onet.vertex_count;
    if (n < 2) throw std::domain_error("grc_weighted: undefined for fewer than 2 vertices");
    GrcReport report;
    report.local_cr.reserve(n);
    for (int v = 0; v < n; ++v) {
        const double cr = weighted_local_reaching(onet, v, sources);
        report.local_cr.push_back(cr);
        report.cr_max = std::max(report.cr_max, cr);
    }
    double acc = 0.0;
    for (double cr : report.local_cr) acc += report.cr_max - cr;
    report.grc = acc / static_cast<double>(n - 1);
    return report;
}

// GRC of each tree's flux orientation; used for per-run Monte-Carlo statistics.
inline std::vector<double> per_run_grc(const Network& net, const std::vector<SpanningTree>& trees) {
    std::vector<double> values;
    values.reserve(trees.size());
    for (const auto& tree : trees) {
        const FluxAssignment q = tree_fluxes(net, tree);
        values.push_back(grc(orient_by_flux(net, q)).grc);
    }
    return values;
}

}  // namespace treeflow
