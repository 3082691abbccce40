#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"
#include "treeflow/descent.hpp"
#include "treeflow/instances.hpp"

using treeflow::DescentConfig;
using treeflow::descend;
using treeflow::make_spanning_tree;
using treeflow::ModelParams;
using treeflow::monte_carlo;
using treeflow::Network;
using treeflow::random_spanning_tree;
using treeflow::SpanningTree;

namespace {

const Network& corpus_net(const std::string& name) {
    static const auto corpus = treeflow::canonical_instances();
    for (const auto& inst : corpus) {
        if (inst.name == name) return inst.net;
    }
    throw std::runtime_error("missing corpus instance " + name);
}

// Independent check of 1-swap local minimality via the naive cut scan.
bool is_one_swap_minimal(const Network& net, const SpanningTree& tree, const ModelParams& params,
                         double rel_tol) {
    const double base = treeflow::energy_tree_optimal(net, treeflow::tree_fluxes(net, tree), params);
    for (int removed : tree.edge_ids) {
        const auto [vi, vj] = treeflow::cut_partition(net, tree, removed);
        std::vector<char> side(net.vertex_count, 0);
        for (int v : vi) side[v] = 1;
        for (int e = 0; e < net.edge_count(); ++e) {
            if (e == removed) continue;
            auto [a, b] = net.edges[e];
            if (side[a] == side[b]) continue;
            std::vector<int> ids;
            for (int t : tree.edge_ids) {
                if (t != removed) ids.push_back(t);
            }
            ids.push_back(e);
            const SpanningTree swapped = make_spanning_tree(std::move(ids));
            const double energy =
                treeflow::energy_tree_optimal(net, treeflow::tree_fluxes(net, swapped), params);
            if (energy < base * (1.0 - rel_tol)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("Wilson sampling is uniform on the triangle") {
    const Network& net = corpus_net("triangle");
    std::mt19937_64 rng(321);
    std::map<std::vector<int>, int> freq;
    const int samples = 30000;
    for (int s = 0; s < samples; ++s) {
        ++freq[random_spanning_tree(net, rng).edge_ids];
    }
    REQUIRE(freq.size() == 3);
    for (const auto& [ids, count] : freq) {
        const double f = static_cast<double>(count) / samples;
        CHECK(f >= 0.32);
        CHECK(f <= 0.35);
    }
}

TEST_CASE("Wilson sampling is uniform on the 4-cycle") {
    const Network& net = corpus_net("cycle4");
    std::mt19937_64 rng(654);
    std::map<std::vector<int>, int> freq;
    const int samples = 40000;
    for (int s = 0; s < samples; ++s) {
        ++freq[random_spanning_tree(net, rng).edge_ids];
    }
    REQUIRE(freq.size() == 4);
    for (const auto& [ids, count] : freq) {
        CHECK(std::fabs(static_cast<double>(count) / samples - 0.25) <= 0.02);
    }
}

TEST_CASE("Wilson sampling of a tree graph returns the unique tree") {
    const Network& net = corpus_net("star5");
    std::mt19937_64 rng(9);
    const SpanningTree tree = random_spanning_tree(net, rng);
    CHECK(tree.edge_ids == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("a 1-swap-minimal tree is a fixed point of descend") {
    const Network& net = corpus_net("cycle4");
    DescentConfig cfg;
    cfg.params = ModelParams{0.5, 1.0};
    std::mt19937_64 rng(1);
    const SpanningTree init = random_spanning_tree(net, rng);
    const auto first = descend(net, init, cfg, rng);
    const auto second = descend(net, first.final_tree, cfg, rng);
    CHECK(second.swaps_accepted == 0);
    CHECK(second.final_tree == first.final_tree);
    CHECK(second.final_energy == Catch::Approx(first.final_energy).epsilon(1e-12));
}

TEST_CASE("on the 4-cycle every start reaches the brute-force optimum") {
    const Network& net = corpus_net("cycle4");
    const ModelParams params{0.5, 1.0};
    // independent oracle: evaluate all four trees directly
    double best = std::numeric_limits<double>::infinity();
    for (const auto& tree : treeflow::enumerate_spanning_trees(net, 10)) {
        best = std::min(best,
                        treeflow::energy_tree_optimal(net, treeflow::tree_fluxes(net, tree), params));
    }
    DescentConfig cfg;
    cfg.params = params;
    for (const auto& init : treeflow::enumerate_spanning_trees(net, 10)) {
        std::mt19937_64 rng(55);
        const auto run = descend(net, init, cfg, rng);
        CHECK(std::fabs(run.final_energy - best) <= 1e-12 * best);
        CHECK(treeflow::is_spanning_tree(net, run.final_tree));
    }
}

TEST_CASE("descent results are 1-swap locally minimal with a decreasing trace") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
        const Network net = testutil::random_network(rng, 4, 10);
        DescentConfig cfg;
        cfg.params = ModelParams{0.3 + 0.6 * treeflow::detail::rand_unit(rng), 1.0};
        const SpanningTree init = random_spanning_tree(net, rng);
        const auto run = descend(net, init, cfg, rng);

        CHECK(treeflow::is_spanning_tree(net, run.final_tree));
        CHECK(is_one_swap_minimal(net, run.final_tree, cfg.params, cfg.improvement_rel_tol));

        REQUIRE(run.energy_trace.size() == static_cast<std::size_t>(run.swaps_accepted) + 1);
        for (std::size_t k = 1; k < run.energy_trace.size(); ++k) {
            CHECK(run.energy_trace[k] <
                  run.energy_trace[k - 1] * (1.0 - cfg.improvement_rel_tol));
        }
        // the scan's decomposed energies must match the direct evaluation
        const double direct =
            treeflow::energy_tree_optimal(net, treeflow::tree_fluxes(net, run.final_tree), cfg.params);
        CHECK(std::fabs(run.final_energy - direct) <= 1e-12 * std::max(1.0, direct));
    }
}

TEST_CASE("iteration cap aborts the descent") {
    const Network& net = corpus_net("path3");
    DescentConfig cfg;
    cfg.params = ModelParams{0.5, 1.0};
    cfg.max_iterations = 1;  // certification alone needs |V|-1 = 2 scans
    std::mt19937_64 rng(2);
    CHECK_THROWS_AS(descend(net, make_spanning_tree({0, 1}), cfg, rng),
                    treeflow::ConvergenceError);
}

TEST_CASE("monte_carlo with a single run wraps that run") {
    const Network& net = corpus_net("triangle");
    DescentConfig cfg;
    cfg.params = ModelParams{0.5, 1.0};
    cfg.seed = 77;
    const auto summary = monte_carlo(net, cfg, 1);
    CHECK(summary.runs == 1);
    CHECK(summary.best_run_index == 0);
    CHECK(summary.best_energy == summary.worst_energy);
    CHECK(summary.energy_std == 0.0);
    CHECK(summary.per_run_energies.size() == 1);
    CHECK(summary.per_run_trees.size() == 1);
}

TEST_CASE("on the triangle every run reaches the same optimum") {
    const Network& net = corpus_net("triangle");
    for (double gamma : {0.3, 0.7, 1.0}) {
        DescentConfig cfg;
        cfg.params = ModelParams{gamma, 1.0};
        cfg.seed = 99;
        const auto summary = monte_carlo(net, cfg, 50);
        CHECK(summary.best_energy == summary.worst_energy);
        const auto [tree, oracle] = treeflow::brute_force_optimum(net, cfg.params);
        CHECK(std::fabs(summary.best_energy - oracle) <= 1e-12 * oracle);
    }
}

TEST_CASE("monte_carlo is bit-identical across worker counts") {
    const Network& net = corpus_net("grid3");
    DescentConfig cfg;
    cfg.params = ModelParams{0.4, 1.0};
    cfg.seed = 31337;
    const auto s1 = monte_carlo(net, cfg, 60, 1);
    const auto s2 = monte_carlo(net, cfg, 60, 2);
    const auto s3 = monte_carlo(net, cfg, 60, 3);
    CHECK(s1.per_run_energies == s2.per_run_energies);  // bitwise
    CHECK(s1.per_run_energies == s3.per_run_energies);
    CHECK(s1.best_run_index == s2.best_run_index);
    CHECK(s1.best_energy == s2.best_energy);
    CHECK(s1.worst_energy == s2.worst_energy);
    CHECK(s1.energy_std == s2.energy_std);
    for (int r = 0; r < 60; ++r) {
        CHECK(s1.per_run_trees[r] == s2.per_run_trees[r]);
    }
}

TEST_CASE("restarts attain the brute-force optimum on the small corpus") {
    // spot-check here; the acceptance suite covers the full corpus
    for (const auto& name : {"cycle4", "grid3", "random03"}) {
        const Network& net = corpus_net(name);
        for (double gamma : {0.3, 0.9}) {
            DescentConfig cfg;
            cfg.params = ModelParams{gamma, 1.0};
            cfg.seed = 271828;
            const auto summary = monte_carlo(net, cfg, 100);
            const auto [tree, oracle] = treeflow::brute_force_optimum(net, cfg.params);
            CHECK(summary.best_energy >= oracle * (1.0 - 1e-12));
            CHECK(summary.best_energy <= oracle * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("monte_carlo validates its inputs") {
    const Network& net = corpus_net("triangle");
    DescentConfig cfg;
    cfg.params = ModelParams{0.5, 1.0};
    CHECK_THROWS_AS(monte_carlo(net, cfg, 0), std::invalid_argument);
    Network broken = net;
    broken.sources = {1.0, -0.25, -0.25};
    CHECK_THROWS_AS(monte_carlo(broken, cfg, 5), std::invalid_argument);
}
