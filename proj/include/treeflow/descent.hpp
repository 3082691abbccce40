#pragma once

#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "treeflow/energy.hpp"
#include "treeflow/errors.hpp"
#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"

namespace treeflow {

namespace detail {

// splitmix64 finalizer; used to key independent per-run engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run_index) {
    return mix64(seed + (run_index + 1) * 0x9e3779b97f4a7c15ULL);
}

// Unbiased bounded draw; avoids std distributions, whose output is
// implementation-defined and would break cross-platform reproducibility.
inline std::size_t rand_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return static_cast<std::size_t>(r % n);
    }
}

inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Uniformly random spanning tree via loop-erased random walks (Wilson).
// Deterministic given the engine state; requires a connected network.
inline SpanningTree random_spanning_tree(const Network& net, std::mt19937_64& rng) {
    const int n = net.vertex_count;
    const Adjacency adj = build_adjacency(net);
    std::vector<char> in_tree(n, 0);
    std::vector<int> next_vertex(n, -1), next_edge(n, -1);
    in_tree[0] = 1;
    std::vector<int> ids;
    ids.reserve(n > 0 ? n - 1 : 0);
    for (int v = 0; v < n; ++v) {
        if (in_tree[v]) continue;
        int u = v;
        while (!in_tree[u]) {  // walk; loops are erased by overwriting next_*
            const auto& nb = adj[u];
            if (nb.empty()) throw std::invalid_argument("random_spanning_tree: disconnected network");
            const auto [w, e] = nb[detail::rand_index(rng, nb.size())];
            next_vertex[u] = w;
            next_edge[u] = e;
            u = w;
        }
        u = v;
        while (!in_tree[u]) {
            in_tree[u] = 1;
            ids.push_back(next_edge[u]);
            u = next_vertex[u];
        }
    }
    return make_spanning_tree(std::move(ids));
}

struct DescentConfig {
    ModelParams params;
    std::uint64_t seed = 0;                // master seed; per-run streams derive from it
    double improvement_rel_tol = 1e-12;    // strict-decrease acceptance threshold
    long long max_iterations = 1'000'000;  // safety cap on candidate scans
    bool record_trace = true;
};

struct DescentRun {
    SpanningTree final_tree;
    double final_energy = 0.0;
    long long swaps_accepted = 0;
    std::vector<double> energy_trace;  // initial energy, then each accepted one
};

namespace detail {

// Scratch state for one descent; reused across scans to avoid reallocation.
struct DescentState {
    Adjacency tree_adj;
    std::vector<char> in_tree;     // per edge id
    std::vector<char> side;        // cut side per vertex (1 = side of endpoint i)
    std::vector<double> port_energy;
    std::vector<char> port_done;
    std::vector<int> order, parent, parent_edge;
    std::vector<double> subtree;
    std::vector<int> untried;

    explicit DescentState(const Network& net)
        : in_tree(net.edge_count(), 0),
          side(net.vertex_count, 0),
          port_energy(net.vertex_count, 0.0),
          port_done(net.vertex_count, 0),
          parent(net.vertex_count, -1),
          parent_edge(net.vertex_count, -1),
          subtree(net.vertex_count, 0.0) {
        order.reserve(net.vertex_count);
    }

    void rebuild(const Network& net, const SpanningTree& tree) {
        std::fill(in_tree.begin(), in_tree.end(), 0);
        for (int e : tree.edge_ids) in_tree[e] = 1;
        tree_adj = tree_adjacency(net, tree);
    }

    // Energy contribution of one cut side when the crossing edge attaches at
    // `port`: the side becomes a standalone tree whose edge fluxes are the
    // source sums of the subtrees hanging away from the port, so a single
    // rooted pass yields sum_e L_e |Q_e|^alpha over the side.
    double side_energy(const Network& net, int port, int removed_edge, double alpha) {
        order.clear();
        order.push_back(port);
        parent[port] = -1;
        parent_edge[port] = -1;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const int v = order[head];
            for (auto [w, e] : tree_adj[v]) {
                if (e == removed_edge || w == parent[v]) continue;
                parent[w] = v;
                parent_edge[w] = e;
                order.push_back(w);
            }
        }
        for (int v : order) subtree[v] = net.sources[v];
        double acc = 0.0;
        for (std::size_t k = order.size(); k-- > 1;) {
            const int v = order[k];
            subtree[parent[v]] += subtree[v];
            acc += pow_abs(subtree[v], alpha) * net.lengths[parent_edge[v]];
        }
        return acc;
    }
};

struct SwapCandidate {
    int edge_id = -1;
    double energy = std::numeric_limits<double>::infinity();
};

// Evaluates every 1-swap replacement for the removed tree edge and returns
// the best (ties go to the lowest edge index). A replacement is a tree iff
// it crosses the cut, so non-crossing edges are skipped. The swapped tree's
// energy splits as side_energy(a) + side_energy(b) + L_ab |sum_A S|^alpha:
// the cut of the new edge is the same vertex partition, and an edge strictly
// inside a side keeps the subtree hanging away from the attachment port.
inline SwapCandidate best_swap(const Network& net, DescentState& st, int removed_edge,
                               const ModelParams& params) {
    const double alpha = flux_exponent(params);
    const double prefactor = energy_prefactor(params);
    const auto [vi, vj] = net.edges[removed_edge];

    std::fill(st.side.begin(), st.side.end(), 0);
    st.order.clear();
    st.order.push_back(vi);
    st.side[vi] = 1;
    double side_sum = net.sources[vi];
    for (std::size_t head = 0; head < st.order.size(); ++head) {
        const int v = st.order[head];
        for (auto [w, e] : st.tree_adj[v]) {
            if (e == removed_edge || st.side[w]) continue;
            st.side[w] = 1;
            side_sum += net.sources[w];
            st.order.push_back(w);
        }
    }
    const double cross = pow_abs(side_sum, alpha);

    std::fill(st.port_done.begin(), st.port_done.end(), 0);
    SwapCandidate best;
    for (int e = 0; e < net.edge_count(); ++e) {
        const auto [a, b] = net.edges[e];
        if (st.side[a] == st.side[b]) continue;
        for (int port : {a, b}) {
            if (!st.port_done[port]) {
                st.port_energy[port] = st.side_energy(net, port, removed_edge, alpha);
                st.port_done[port] = 1;
            }
        }
        const double energy =
            prefactor * (st.port_energy[a] + st.port_energy[b] + net.lengths[e] * cross);
        if (energy < best.energy) {
            best.energy = energy;
            best.edge_id = e;
        }
    }
    return best;
}

}  // namespace detail

// Single-edge-swap energy descent over spanning trees. Repeatedly picks an
// untried tree edge at random, scans every cut-crossing replacement, and
// accepts the best one when it strictly lowers the optimal energy; an
// accepted swap resets the tried set. Stops once every tree edge has been
// tried without improvement, which certifies 1-swap local minimality.
inline DescentRun descend(const Network& net, const SpanningTree& init,
                          const DescentConfig& cfg, std::mt19937_64& rng) {
    validate_params(cfg.params);
    if (!(cfg.improvement_rel_tol > 0.0)) {
        throw std::invalid_argument("descend: improvement_rel_tol must be positive");
    }
    if (!is_spanning_tree(net, init)) {
        throw std::invalid_argument("descend: init is not a spanning tree of the network");
    }

    DescentRun run;
    run.final_tree = init;
    run.final_energy = energy_tree_optimal(net, tree_fluxes(net, init), cfg.params);
    if (cfg.record_trace) run.energy_trace.push_back(run.final_energy);

    const int tree_size = net.vertex_count - 1;
    if (tree_size <= 0) return run;

    detail::DescentState st(net);
    st.rebuild(net, run.final_tree);
    std::vector<char> tried(net.edge_count(), 0);
    int tried_count = 0;
    long long iterations = 0;

    while (tried_count < tree_size) {
        if (++iterations > cfg.max_iterations) {
            throw ConvergenceError("descend: iteration cap exceeded");
        }
        st.untried.clear();
        for (int e : run.final_tree.edge_ids) {
            if (!tried[e]) st.untried.push_back(e);
        }
        const int removed = st.untried[detail::rand_index(rng, st.untried.size())];

        const auto cand = detail::best_swap(net, st, removed, cfg.params);
        if (cand.edge_id >= 0 &&
            cand.energy < run.final_energy * (1.0 - cfg.improvement_rel_tol)) {
            auto& ids = run.final_tree.edge_ids;
            ids.erase(std::lower_bound(ids.begin(), ids.end(), removed));
            ids.insert(std::upper_bound(ids.begin(), ids.end(), cand.edge_id), cand.edge_id);
            st.rebuild(net, run.final_tree);
            assert(is_spanning_tree(net, run.final_tree));
            run.final_energy = cand.energy;
            ++run.swaps_accepted;
            if (cfg.record_trace) run.energy_trace.push_back(cand.energy);
            std::fill(tried.begin(), tried.end(), 0);
            tried_count = 0;
        } else {
            tried[removed] = 1;
            ++tried_count;
        }
    }
    return run;
}

struct McSummary {
    int runs = 0;
    int best_run_index = -1;
    DescentRun best_run;
    double best_energy = std::numeric_limits<double>::infinity();
    double worst_energy = -std::numeric_limits<double>::infinity();
    double energy_std = 0.0;
    std::vector<double> per_run_energies;
    std::vector<SpanningTree> per_run_trees;
    std::vector<double> grc_values;  // optionally filled by the centrality layer
};

// Independent restarts of descend from Wilson-random initial trees. Run r
// draws its own engine seeded from (cfg.seed, r), so the result is
// bit-identical for any worker count; aggregation walks runs in index order.
inline McSummary monte_carlo(const Network& net, const DescentConfig& cfg, int runs,
                             int threads = 0) {
    if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be >= 1");
    const ValidationReport report = validate_network(net);
    if (!report.valid()) {
        throw std::invalid_argument("monte_carlo: invalid network: " + report.violations.front());
    }

    std::vector<DescentRun> results(runs);
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    threads = std::min(threads, runs);

    std::atomic<int> counter{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const int r = counter.fetch_add(1);
            if (r >= runs) return;
            try {
                std::mt19937_64 rng(detail::run_seed(cfg.seed, static_cast<std::uint64_t>(r)));
                const SpanningTree init = random_spanning_tree(net, rng);
                results[r] = descend(net, init, cfg, rng);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                counter.store(runs);
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    McSummary summary;
    summary.runs = runs;
    summary.per_run_energies.reserve(runs);
    summary.per_run_trees.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        const double e = results[r].final_energy;
        summary.per_run_energies.push_back(e);
        if (e < summary.best_energy) {
            summary.best_energy = e;
            summary.best_run_index = r;
        }
        if (e > summary.worst_energy) summary.worst_energy = e;
    }
    summary.best_run = results[summary.best_run_index];
    for (auto& run : results) summary.per_run_trees.push_back(std::move(run.final_tree));

    double mean = 0.0;
    for (double e : summary.per_run_energies) mean += e;
    mean /= runs;
    double var = 0.0;
    for (double e : summary.per_run_energies) var += (e - mean) * (e - mean);
    summary.energy_std = std::sqrt(var / runs);
    return summary;
}

}  // namespace treeflow
