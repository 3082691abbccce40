#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace treeflow {

// Undirected connected graph with per-edge lengths and per-vertex source/sink
// strengths. Edges are stored with i < j; every signed per-edge quantity
// (fluxes in particular) follows that orientation.
struct Network {
    int vertex_count = 0;
    std::vector<std::pair<int, int>> edges;          // (i, j) with i < j
    std::vector<double> lengths;                     // L > 0, aligned with edges
    std::vector<double> sources;                     // S, positive = inflow
    std::vector<std::array<double, 2>> coordinates;  // optional; empty when absent

    int edge_count() const { return static_cast<int>(edges.size()); }
    bool has_coordinates() const { return !coordinates.empty(); }
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];  // path halving
            x = parent_[x];
        }
        return x;
    }

    // Returns false if a and b were already in the same set.
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
};

}  // namespace detail

inline double max_abs_source(const Network& net) {
    double m = 0.0;
    for (double s : net.sources) m = std::max(m, std::fabs(s));
    return m;
}

// Per-vertex lists of (neighbor, edge id).
using Adjacency = std::vector<std::vector<std::pair<int, int>>>;

inline Adjacency build_adjacency(const Network& net) {
    Adjacency adj(net.vertex_count);
    for (int e = 0; e < net.edge_count(); ++e) {
        auto [i, j] = net.edges[e];
        adj[i].emplace_back(j, e);
        adj[j].emplace_back(i, e);
    }
    return adj;
}

struct ValidationReport {
    std::vector<std::string> violations;
    bool valid() const { return violations.empty(); }
};

// Report-style check of the standing assumptions: normalized edges,
// positive lengths, balanced sources, connectivity.
inline ValidationReport validate_network(const Network& net) {
    ValidationReport report;
    auto fail = [&report](const std::string& msg) { report.violations.push_back(msg); };

    const int n = net.vertex_count;
    if (n <= 0) {
        fail("vertex_count must be positive");
        return report;
    }

    bool edges_ok = true;
    std::set<std::pair<int, int>> seen;
    for (int e = 0; e < net.edge_count(); ++e) {
        auto [i, j] = net.edges[e];
        if (i < 0 || j < 0 || i >= n || j >= n) {
            std::ostringstream os;
            os << "edge " << e << " references an invalid vertex id";
            fail(os.str());
            edges_ok = false;
            continue;
        }
        if (i == j) {
            std::ostringstream os;
            os << "edge " << e << " is a self-loop";
            fail(os.str());
            edges_ok = false;
            continue;
        }
        if (i > j) {
            std::ostringstream os;
            os << "edge " << e << " is not normalized to i < j";
            fail(os.str());
            edges_ok = false;
            continue;
        }
        if (!seen.insert({i, j}).second) {
            std::ostringstream os;
            os << "duplicate edge (" << i << ", " << j << ")";
            fail(os.str());
        }
    }

    if (static_cast<int>(net.lengths.size()) != net.edge_count()) {
        fail("lengths array is not aligned with edges");
    } else {
        for (int e = 0; e < net.edge_count(); ++e) {
            if (!(net.lengths[e] > 0.0)) {
                std::ostringstream os;
                os << "nonpositive length at edge " << e;
                fail(os.str());
            }
        }
    }

    if (static_cast<int>(net.sources.size()) != n) {
        fail("sources array is not aligned with vertices");
    } else {
        double sum = 0.0;
        for (double s : net.sources) sum += s;
        if (std::fabs(sum) > 1e-12) {
            std::ostringstream os;
            os << "unbalanced sources: sum = " << sum;
            fail(os.str());
        }
    }

    if (net.has_coordinates() && static_cast<int>(net.coordinates.size()) != n) {
        fail("coordinates array is not aligned with vertices");
    }

    if (edges_ok) {
        detail::UnionFind uf(n);
        int components = n;
        for (auto [i, j] : net.edges) {
            if (uf.unite(i, j)) --components;
        }
        if (components != 1) fail("graph is disconnected");
    }

    return report;
}

}  // namespace treeflow
