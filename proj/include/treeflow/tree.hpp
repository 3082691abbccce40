#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "treeflow/network.hpp"

namespace treeflow {

// A spanning tree, stored as sorted indices into Network.edges.
struct SpanningTree {
    std::vector<int> edge_ids;  // exactly |V|-1 entries, ascending
};

inline bool operator==(const SpanningTree& a, const SpanningTree& b) {
    return a.edge_ids == b.edge_ids;
}

// Signed flux per edge in the stored i<j orientation: Q > 0 means flow i -> j.
struct FluxAssignment {
    std::vector<double> per_edge_flux;  // aligned with Network.edges
};

// Normalizes an edge-id list into the sorted SpanningTree representation.
inline SpanningTree make_spanning_tree(std::vector<int> edge_ids) {
    std::sort(edge_ids.begin(), edge_ids.end());
    return SpanningTree{std::move(edge_ids)};
}

inline bool is_spanning_tree(const Network& net, const SpanningTree& tree) {
    const int n = net.vertex_count;
    if (static_cast<int>(tree.edge_ids.size()) != n - 1) return false;
    detail::UnionFind uf(n);
    int prev = -1;
    for (int e : tree.edge_ids) {
        if (e <= prev || e >= net.edge_count()) return false;  // ascending ids
        prev = e;
        auto [i, j] = net.edges[e];
        if (!uf.unite(i, j)) return false;  // cycle
    }
    return true;  // n-1 acyclic edges on n vertices are connected
}

// Tree adjacency with lists sorted by neighbor id, so traversal order (and
// hence floating-point accumulation order) depends only on the tree itself,
// not on the edge enumeration order of the Network.
inline Adjacency tree_adjacency(const Network& net, const SpanningTree& tree) {
    Adjacency adj(net.vertex_count);
    for (int e : tree.edge_ids) {
        auto [i, j] = net.edges[e];
        adj[i].emplace_back(j, e);
        adj[j].emplace_back(i, e);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

// Splits V into the two components created by deleting one tree edge.
// Returns (V_i, V_j) with endpoint i in the first set, both sorted.
inline std::pair<std::vector<int>, std::vector<int>> cut_partition(
    const Network& net, const SpanningTree& tree, int edge_id) {
    if (!std::binary_search(tree.edge_ids.begin(), tree.edge_ids.end(), edge_id)) {
        throw std::invalid_argument("cut_partition: edge is not part of the tree");
    }
    const auto adj = tree_adjacency(net, tree);
    const auto [vi, vj] = net.edges[edge_id];

    std::vector<char> on_i_side(net.vertex_count, 0);
    std::vector<int> stack = {vi};
    on_i_side[vi] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (auto [w, e] : adj[v]) {
            if (e == edge_id || on_i_side[w]) continue;
            on_i_side[w] = 1;
            stack.push_back(w);
        }
    }

    std::pair<std::vector<int>, std::vector<int>> parts;
    for (int v = 0; v < net.vertex_count; ++v) {
        (on_i_side[v] ? parts.first : parts.second).push_back(v);
    }
    return parts;
}

namespace detail {

// Iterative rooted DFS over a tree adjacency. Fills preorder, parent and
// parent-edge arrays for the component containing root.
inline void rooted_order(const Adjacency& adj, int root, std::vector<int>& order,
                         std::vector<int>& parent, std::vector<int>& parent_edge) {
    order.clear();
    order.push_back(root);
    parent[root] = -1;
    parent_edge[root] = -1;
    for (std::size_t head = 0; head < order.size(); ++head) {
        int v = order[head];
        for (auto [w, e] : adj[v]) {
            if (w == parent[v]) continue;
            parent[w] = v;
            parent_edge[w] = e;
            order.push_back(w);
        }
    }
}

}  // namespace detail

// Closed-form tree fluxes: deleting a tree edge splits V into (V_i, V_j) and
// conservation forces Q_ij = sum of S over V_i (in the i<j orientation).
// The symmetric difference form sum(V_i) - sum(V_j) equals twice this value
// whenever the sources balance globally; the conservation-consistent single
// sum is what the optimal-energy formula consumes. Non-tree edges carry 0.
inline FluxAssignment tree_fluxes(const Network& net, const SpanningTree& tree) {
    if (!is_spanning_tree(net, tree)) {
        throw std::invalid_argument("tree_fluxes: not a spanning tree of the network");
    }
    const int n = net.vertex_count;
    const auto adj = tree_adjacency(net, tree);

    std::vector<int> order, parent(n), parent_edge(n);
    order.reserve(n);
    detail::rooted_order(adj, 0, order, parent, parent_edge);

    std::vector<double> subtree(net.sources);
    for (std::size_t k = order.size(); k-- > 1;) {
        subtree[parent[order[k]]] += subtree[order[k]];
    }
    double total = 0.0;
    for (double s : net.sources) total += s;

    FluxAssignment q;
    q.per_edge_flux.assign(net.edge_count(), 0.0);
    for (int v : order) {
        int e = parent_edge[v];
        if (e < 0) continue;
        auto [i, j] = net.edges[e];
        // v is the child endpoint; its subtree is the component cut off by e.
        q.per_edge_flux[e] = (v == i) ? subtree[i] : total - subtree[j];
    }
    return q;
}

// Largest per-vertex violation of local mass conservation: net outflow
// minus the prescribed S.
inline double conservation_residual(const Network& net, const FluxAssignment& q) {
    std::vector<double> out(net.vertex_count, 0.0);
    for (int e = 0; e < net.edge_count(); ++e) {
        auto [i, j] = net.edges[e];
        out[i] += q.per_edge_flux[e];
        out[j] -= q.per_edge_flux[e];
    }
    double worst = 0.0;
    for (int v = 0; v < net.vertex_count; ++v) {
        worst = std::max(worst, std::fabs(out[v] - net.sources[v]));
    }
    return worst;
}

// Vertices reachable from start along directed edges, start itself excluded.
inline std::vector<int> reachable_set(const std::vector<std::vector<int>>& out_adj, int start) {
    const int n = static_cast<int>(out_adj.size());
    if (start < 0 || start >= n) {
        throw std::invalid_argument("reachable_set: invalid start vertex");
    }
    std::vector<char> seen(n, 0);
    seen[start] = 1;
    std::vector<int> stack = {start};
    std::vector<int> out;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : out_adj[v]) {
            if (seen[w]) continue;
            seen[w] = 1;
            out.push_back(w);
            stack.push_back(w);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace treeflow
