#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "treeflow/descent.hpp"
#include "treeflow/energy.hpp"
#include "treeflow/errors.hpp"
#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"

namespace treeflow {

// Triangulated upper-half-ellipse on a triangular lattice. The default shape
// is calibrated to 122 vertices; the stem (vertex 0) is the unique left-most
// lattice point (0, 0) and carries the single unit source, every other
// vertex is a uniform sink.
struct LeafSpec {
    int target_vertices = 122;
    double axis_x = 1.0;    // half-ellipse spans x in [0, 2*axis_x]
    double axis_y = 0.62;   // blade height
    double spacing = 0.101; // lattice constant; defaults give 122 vertices, 317 edges
};

inline Network generate_leaf(const LeafSpec& spec = {}) {
    if (!(spec.spacing > 0.0) || !(spec.axis_x > 0.0) || !(spec.axis_y > 0.0)) {
        throw std::invalid_argument("generate_leaf: shape parameters must be positive");
    }
    const double h = spec.spacing;
    const double dy = h * std::sqrt(3.0) / 2.0;
    const double ax = spec.axis_x;
    const double ay = spec.axis_y;

    std::vector<std::array<double, 2>> points;
    const int rmax = static_cast<int>(std::floor(ay / dy)) + 1;
    const int cmax = static_cast<int>(std::floor(2.0 * ax / h)) + 2;
    for (int r = 0; r <= rmax; ++r) {
        const double y = r * dy;
        const double xoff = (r % 2 == 1) ? 0.5 * h : 0.0;
        for (int col = 0; col <= cmax; ++col) {
            const double x = xoff + col * h;
            const double ex = (x - ax) / ax;
            const double ey = y / ay;
            if (ex * ex + ey * ey <= 1.0 + 1e-9) points.push_back({x, y});
        }
    }
    std::sort(points.begin(), points.end());

    const int n = static_cast<int>(points.size());
    if (n < 2) throw std::invalid_argument("generate_leaf: spec yields fewer than 2 vertices");

    Network net;
    net.vertex_count = n;
    net.coordinates = points;
    const double reach_sq = h * h * (1.0 + 1e-6);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = points[j][0] - points[i][0];
            if (dx * dx > reach_sq) break;  // points sorted by x
            const double dyv = points[j][1] - points[i][1];
            const double d2 = dx * dx + dyv * dyv;
            if (d2 <= reach_sq) {
                net.edges.emplace_back(i, j);
                net.lengths.push_back(std::sqrt(d2));
            }
        }
    }

    net.sources.assign(n, -1.0 / (n - 1));
    net.sources[0] = 1.0;  // stem: unique left-most point

    detail::UnionFind uf(n);
    int components = n;
    for (auto [i, j] : net.edges) {
        if (uf.unite(i, j)) --components;
    }
    if (components != 1) {
        throw std::invalid_argument("generate_leaf: spec yields a disconnected graph");
    }
    return net;
}

struct NamedInstance {
    std::string name;
    Network net;
};

namespace detail {

// Unit-length network with a unit source at vertex 0 and uniform sinks.
inline Network simple_net(int n, std::vector<std::pair<int, int>> edges) {
    Network net;
    net.vertex_count = n;
    net.edges = std::move(edges);
    net.lengths.assign(net.edges.size(), 1.0);
    net.sources.assign(n, -1.0 / (n - 1));
    net.sources[0] = 1.0;
    return net;
}

}  // namespace detail

// Fixed test corpus: small named graphs plus 20 seeded random connected
// graphs with at most 8 vertices and 14 edges, all with one unit source at
// vertex 0 and uniform sinks.
inline std::vector<NamedInstance> canonical_instances() {
    std::vector<NamedInstance> out;
    out.push_back({"path2", detail::simple_net(2, {{0, 1}})});
    out.push_back({"path3", detail::simple_net(3, {{0, 1}, {1, 2}})});
    out.push_back({"triangle", detail::simple_net(3, {{0, 1}, {0, 2}, {1, 2}})});
    out.push_back({"cycle4", detail::simple_net(4, {{0, 1}, {0, 3}, {1, 2}, {2, 3}})});
    out.push_back({"star5", detail::simple_net(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}})});
    {
        // 3x3 grid, row-major vertex ids
        std::vector<std::pair<int, int>> edges;
        for (int r = 0; r < 3; ++r) {
            for (int col = 0; col < 3; ++col) {
                const int v = 3 * r + col;
                if (col + 1 < 3) edges.emplace_back(v, v + 1);
                if (r + 1 < 3) edges.emplace_back(v, v + 3);
            }
        }
        std::sort(edges.begin(), edges.end());
        out.push_back({"grid3", detail::simple_net(9, std::move(edges))});
    }
    {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < 5; ++i) {
            for (int j = i + 1; j < 5; ++j) edges.emplace_back(i, j);
        }
        out.push_back({"k5", detail::simple_net(5, std::move(edges))});
    }

    for (int k = 0; k < 20; ++k) {
        std::mt19937_64 rng(detail::mix64(0xC0FFEEULL + k));
        const int n = 4 + static_cast<int>(detail::rand_index(rng, 5));  // 4..8
        std::vector<std::pair<int, int>> edges;
        for (int v = 1; v < n; ++v) {
            const int u = static_cast<int>(detail::rand_index(rng, v));
            edges.emplace_back(std::min(u, v), std::max(u, v));
        }
        for (int i = 0; i < n && static_cast<int>(edges.size()) < 14; ++i) {
            for (int j = i + 1; j < n && static_cast<int>(edges.size()) < 14; ++j) {
                if (std::find(edges.begin(), edges.end(), std::make_pair(i, j)) != edges.end()) {
                    continue;
                }
                if (detail::rand_unit(rng) < 0.3) edges.emplace_back(i, j);
            }
        }
        std::sort(edges.begin(), edges.end());
        Network net = detail::simple_net(n, std::move(edges));
        for (auto& len : net.lengths) len = 0.5 + 1.5 * detail::rand_unit(rng);
        std::ostringstream name;
        name << "random" << (k < 10 ? "0" : "") << k;
        out.push_back({name.str(), std::move(net)});
    }
    return out;
}

// Number of spanning trees by the matrix-tree theorem: determinant of the
// Laplacian with the first row/column removed. Exact (as a double) well past
// the enumeration cap sizes used here.
inline double spanning_tree_count(const Network& net) {
    const int n = net.vertex_count;
    if (n == 1) return 1.0;
    const int m = n - 1;
    std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
    for (auto [i, j] : net.edges) {
        if (i > 0) a[static_cast<std::size_t>(i - 1) * m + (i - 1)] += 1.0;
        if (j > 0) a[static_cast<std::size_t>(j - 1) * m + (j - 1)] += 1.0;
        if (i > 0 && j > 0) {
            a[static_cast<std::size_t>(i - 1) * m + (j - 1)] -= 1.0;
            a[static_cast<std::size_t>(j - 1) * m + (i - 1)] -= 1.0;
        }
    }
    // LU with partial pivoting
    double det = 1.0;
    for (int k = 0; k < m; ++k) {
        int pivot = k;
        for (int r = k + 1; r < m; ++r) {
            if (std::fabs(a[static_cast<std::size_t>(r) * m + k]) >
                std::fabs(a[static_cast<std::size_t>(pivot) * m + k])) {
                pivot = r;
            }
        }
        if (a[static_cast<std::size_t>(pivot) * m + k] == 0.0) return 0.0;
        if (pivot != k) {
            for (int col = 0; col < m; ++col) {
                std::swap(a[static_cast<std::size_t>(k) * m + col],
                          a[static_cast<std::size_t>(pivot) * m + col]);
            }
            det = -det;
        }
        const double piv = a[static_cast<std::size_t>(k) * m + k];
        det *= piv;
        for (int r = k + 1; r < m; ++r) {
            const double f = a[static_cast<std::size_t>(r) * m + k] / piv;
            for (int col = k; col < m; ++col) {
                a[static_cast<std::size_t>(r) * m + col] -=
                    f * a[static_cast<std::size_t>(k) * m + col];
            }
        }
    }
    return det;
}

namespace detail {

// Union-find with an undo stack (union by size, no path compression) for
// backtracking enumeration.
class RollbackUnionFind {
public:
    explicit RollbackUnionFind(int n) : parent_(n), size_(n, 1) {
        for (int v = 0; v < n; ++v) parent_[v] = v;
    }

    int find(int x) const {
        while (parent_[x] != x) x = parent_[x];
        return x;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        history_.push_back(b);
        return true;
    }

    void rollback(std::size_t count) {
        while (count-- > 0) {
            const int b = history_.back();
            history_.pop_back();
            size_[parent_[b]] -= size_[b];
            parent_[b] = b;
        }
    }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
    std::vector<int> history_;
};

template <typename F>
void enumerate_trees_rec(const Network& net, int edge_idx, std::vector<int>& chosen,
                         RollbackUnionFind& uf, F&& emit) {
    const int need = net.vertex_count - 1;
    if (static_cast<int>(chosen.size()) == need) {
        emit(SpanningTree{chosen});
        return;
    }
    if (edge_idx == net.edge_count()) return;
    if (static_cast<int>(chosen.size()) + (net.edge_count() - edge_idx) < need) return;

    // include branch first, so trees are emitted in lexicographic edge order
    const auto [i, j] = net.edges[edge_idx];
    if (uf.unite(i, j)) {
        chosen.push_back(edge_idx);
        enumerate_trees_rec(net, edge_idx + 1, chosen, uf, emit);
        chosen.pop_back();
        uf.rollback(1);
    }

    // exclude branch only if the remaining edges can still span
    UnionFind scratch(net.vertex_count);
    int components = net.vertex_count;
    for (int e : chosen) {
        if (scratch.unite(net.edges[e].first, net.edges[e].second)) --components;
    }
    for (int e = edge_idx + 1; e < net.edge_count(); ++e) {
        if (scratch.unite(net.edges[e].first, net.edges[e].second)) --components;
    }
    if (components == 1) {
        enumerate_trees_rec(net, edge_idx + 1, chosen, uf, emit);
    }
}

}  // namespace detail

// Visits every spanning tree exactly once, in lexicographic edge-id order.
// Refuses up front (matrix-tree count) when the instance exceeds the cap.
template <typename F>
void for_each_spanning_tree(const Network& net, std::uint64_t cap, F&& visit) {
    const double count = spanning_tree_count(net);
    if (count > static_cast<double>(cap) + 0.5) {
        std::ostringstream os;
        os << "for_each_spanning_tree: instance has " << count << " spanning trees, cap is "
           << cap;
        throw CapExceeded(os.str(), count);
    }
    std::vector<int> chosen;
    chosen.reserve(net.vertex_count > 0 ? net.vertex_count - 1 : 0);
    detail::RollbackUnionFind uf(net.vertex_count);
    detail::enumerate_trees_rec(net, 0, chosen, uf, visit);
}

inline std::vector<SpanningTree> enumerate_spanning_trees(const Network& net, std::uint64_t cap) {
    std::vector<SpanningTree> trees;
    for_each_spanning_tree(net, cap, [&trees](const SpanningTree& t) { trees.push_back(t); });
    return trees;
}

// Exhaustive optimum over spanning trees; ties resolved by lexicographic
// edge-id order (the enumeration order itself).
inline std::pair<SpanningTree, double> brute_force_optimum(const Network& net,
                                                           const ModelParams& params,
                                                           std::uint64_t cap = 1'000'000) {
    validate_params(params);
    SpanningTree best;
    double best_energy = std::numeric_limits<double>::infinity();
    for_each_spanning_tree(net, cap, [&](const SpanningTree& tree) {
        const double e = energy_tree_optimal(net, tree_fluxes(net, tree), params);
        if (e < best_energy) {
            best_energy = e;
            best = tree;
        }
    });
    if (best.edge_ids.empty() && net.vertex_count > 1) {
        throw std::invalid_argument("brute_force_optimum: network has no spanning tree");
    }
    return {best, best_energy};
}

}  // namespace treeflow
