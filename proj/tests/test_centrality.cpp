#include <algorithm>
#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"
#include "treeflow/centrality.hpp"
#include "treeflow/descent.hpp"
#include "treeflow/instances.hpp"

using treeflow::FluxAssignment;
using treeflow::grc;
using treeflow::Network;
using treeflow::orient_by_flux;
using treeflow::OrientedNetwork;

namespace {

OrientedNetwork directed_path(int n) {
    OrientedNetwork onet;
    onet.vertex_count = n;
    for (int v = 0; v + 1 < n; ++v) onet.directed_edges.emplace_back(v, v + 1);
    return onet;
}

OrientedNetwork out_star(int n) {
    OrientedNetwork onet;
    onet.vertex_count = n;
    for (int v = 1; v < n; ++v) onet.directed_edges.emplace_back(0, v);
    return onet;
}

}  // namespace

TEST_CASE("flux orientation of a path tree") {
    Network net;
    net.vertex_count = 3;
    net.edges = {{0, 1}, {1, 2}};
    net.lengths = {1.0, 1.0};
    net.sources = {1.0, -0.5, -0.5};
    const FluxAssignment q = treeflow::tree_fluxes(net, treeflow::make_spanning_tree({0, 1}));
    const OrientedNetwork onet = orient_by_flux(net, q);
    REQUIRE(onet.directed_edges.size() == 2);
    CHECK(onet.directed_edges[0] == std::make_pair(0, 1));
    CHECK(onet.directed_edges[1] == std::make_pair(1, 2));
}

TEST_CASE("zero sources orient to an empty edge set") {
    Network net;
    net.vertex_count = 3;
    net.edges = {{0, 1}, {1, 2}};
    net.lengths = {1.0, 1.0};
    net.sources = {0.0, 0.0, 0.0};
    const FluxAssignment q = treeflow::tree_fluxes(net, treeflow::make_spanning_tree({0, 1}));
    CHECK(orient_by_flux(net, q).directed_edges.empty());
}

TEST_CASE("the leaf stem only sends flow outward") {
    const Network leaf = treeflow::generate_leaf();
    std::mt19937_64 rng(12);
    const auto tree = treeflow::random_spanning_tree(leaf, rng);
    const auto onet = orient_by_flux(leaf, treeflow::tree_fluxes(leaf, tree));
    int out_deg = 0, in_deg = 0;
    for (auto [from, to] : onet.directed_edges) {
        if (from == 0) ++out_deg;
        if (to == 0) ++in_deg;
    }
    CHECK(out_deg >= 1);
    CHECK(in_deg == 0);
}

TEST_CASE("local reaching centrality along a directed path") {
    const OrientedNetwork onet = directed_path(3);
    CHECK(treeflow::local_reaching_centrality(onet, 0) == 1.0);
    CHECK(treeflow::local_reaching_centrality(onet, 1) == 0.5);
    CHECK(treeflow::local_reaching_centrality(onet, 2) == 0.0);
    CHECK_THROWS_AS(treeflow::local_reaching_centrality(onet, 5), std::invalid_argument);
    OrientedNetwork lone;
    lone.vertex_count = 1;
    CHECK_THROWS_AS(treeflow::local_reaching_centrality(lone, 0), std::domain_error);
}

TEST_CASE("out-star hierarchy is maximal") {
    for (int n : {3, 5, 9}) {
        const auto report = grc(out_star(n));
        CHECK(report.grc == 1.0);  // exact
        CHECK(report.cr_max == 1.0);
    }
}

TEST_CASE("directed path GRC matches the closed form N/(2(N-1))") {
    for (int n = 2; n <= 8; ++n) {
        const auto report = grc(directed_path(n));
        const double expected = n / (2.0 * (n - 1.0));
        CHECK(std::fabs(report.grc - expected) <= 1e-12);
    }
    CHECK(grc(directed_path(3)).grc == Catch::Approx(0.75).margin(1e-15));
}

TEST_CASE("GRC stays within [0,1] and is relabeling-invariant") {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 100; ++trial) {
        const Network net = testutil::random_network(rng, 3, 12);
        const auto tree = treeflow::random_spanning_tree(net, rng);
        const auto onet = orient_by_flux(net, treeflow::tree_fluxes(net, tree));
        const auto report = grc(onet);
        CHECK(report.grc >= 0.0);
        CHECK(report.grc <= 1.0);
        CHECK(report.cr_max == *std::max_element(report.local_cr.begin(), report.local_cr.end()));

        // permute vertex labels
        std::vector<int> perm(net.vertex_count);
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = net.vertex_count - 1; k > 0; --k) {
            std::swap(perm[k], perm[treeflow::detail::rand_index(rng, k + 1)]);
        }
        OrientedNetwork relabeled;
        relabeled.vertex_count = onet.vertex_count;
        for (auto [from, to] : onet.directed_edges) {
            relabeled.directed_edges.emplace_back(perm[from], perm[to]);
        }
        CHECK(std::fabs(grc(relabeled).grc - report.grc) <= 1e-12);
    }
}

TEST_CASE("a single source on a tree reaches every vertex") {
    for (const auto& inst : treeflow::canonical_instances()) {
        std::mt19937_64 rng(55);
        const auto tree = treeflow::random_spanning_tree(inst.net, rng);
        const auto onet = orient_by_flux(inst.net, treeflow::tree_fluxes(inst.net, tree));
        const auto report = grc(onet);
        CHECK(report.local_cr[0] == 1.0);
        CHECK(report.cr_max == 1.0);
    }
}

TEST_CASE("weighted and unweighted GRC coincide for uniform sinks") {
    for (const auto& name : {"path3", "cycle4", "grid3", "k5"}) {
        for (const auto& inst : treeflow::canonical_instances()) {
            if (inst.name != name) continue;
            std::mt19937_64 rng(7);
            const auto tree = treeflow::random_spanning_tree(inst.net, rng);
            const auto onet = orient_by_flux(inst.net, treeflow::tree_fluxes(inst.net, tree));
            const auto unweighted = grc(onet);
            const auto weighted = treeflow::grc_weighted(onet, inst.net.sources);
            CHECK(std::fabs(unweighted.grc - weighted.grc) <= 1e-12);
            for (int v = 0; v < inst.net.vertex_count; ++v) {
                CHECK(std::fabs(unweighted.local_cr[v] - weighted.local_cr[v]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("GRC requires at least two vertices") {
    OrientedNetwork lone;
    lone.vertex_count = 1;
    CHECK_THROWS_AS(grc(lone), std::domain_error);
}

TEST_CASE("per-run GRC lines up with individual evaluations") {
    const Network net = [] {
        Network n;
        n.vertex_count = 4;
        n.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
        n.lengths = {1.0, 1.0, 1.0, 1.0};
        n.sources = {1.0, -1.0 / 3, -1.0 / 3, -1.0 / 3};
        return n;
    }();
    std::mt19937_64 rng(3);
    std::vector<treeflow::SpanningTree> trees;
    for (int k = 0; k < 5; ++k) trees.push_back(treeflow::random_spanning_tree(net, rng));
    const auto values = treeflow::per_run_grc(net, trees);
    REQUIRE(values.size() == trees.size());
    for (std::size_t k = 0; k < trees.size(); ++k) {
        const auto onet = orient_by_flux(net, treeflow::tree_fluxes(net, trees[k]));
        CHECK(values[k] == grc(onet).grc);
    }
}
