#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "treeflow/convex.hpp"
#include "treeflow/instances.hpp"

using treeflow::GradientConfig;
using treeflow::minimize_convex;
using treeflow::ModelParams;
using treeflow::Network;

namespace {

const Network& corpus_net(const std::string& name) {
    static const auto corpus = treeflow::canonical_instances();
    for (const auto& inst : corpus) {
        if (inst.name == name) return inst.net;
    }
    throw std::runtime_error("missing corpus instance " + name);
}

}  // namespace

TEST_CASE("two-node optimum is C=1 with energy 2") {
    const auto res = minimize_convex(corpus_net("path2"), GradientConfig{});
    CHECK(res.energy == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(res.conductivities.per_edge_c[0] == Catch::Approx(1.0).epsilon(1e-6));
    // high-flux edges never sink to the gradient floor
    CHECK(res.conductivities.per_edge_c[0] > 1e-6);
}

TEST_CASE("symmetric triangle converges to the best tree energy") {
    const auto res = minimize_convex(corpus_net("triangle"), GradientConfig{});
    const auto [tree, oracle] =
        treeflow::brute_force_optimum(corpus_net("triangle"), ModelParams{1.0, 1.0});
    CHECK(std::fabs(res.energy - oracle) <= 1e-6 * oracle);
}

TEST_CASE("convex optimum equals the brute-force tree optimum on small instances") {
    for (const auto& name : {"path3", "cycle4", "star5", "grid3", "k5", "random01", "random07"}) {
        INFO(name);
        const Network& net = corpus_net(name);
        const auto res = minimize_convex(net, GradientConfig{});
        const auto [tree, oracle] = treeflow::brute_force_optimum(net, ModelParams{1.0, 1.0});
        CHECK(std::fabs(res.energy - oracle) <= 1e-6 * oracle);
        // trees can never genuinely beat the convex optimum
        CHECK(oracle >= res.energy * (1.0 - 1e-8));
    }
}

TEST_CASE("objective trace is non-increasing and iterates stay nonnegative") {
    const auto res = minimize_convex(corpus_net("grid3"), GradientConfig{});
    for (std::size_t k = 1; k < res.energy_trace.size(); ++k) {
        CHECK(res.energy_trace[k] <= res.energy_trace[k - 1]);
    }
    for (double c : res.conductivities.per_edge_c) CHECK(c >= 0.0);
    CHECK(res.projected_gradient_norm >= 0.0);
}

TEST_CASE("tree support extraction returns the active tree when it is one") {
    const Network& net = corpus_net("path2");
    const auto res = minimize_convex(net, GradientConfig{});
    const auto support = treeflow::extract_tree_support(res.conductivities, net, 1e-6);
    REQUIRE(support.has_value());
    CHECK(support->edge_ids == std::vector<int>{0});
}

TEST_CASE("a looped minimizer support is reported as non-extremal, not an error") {
    // alternating sources on the 4-cycle: the symmetric interior minimizer
    // keeps all four edges active, which is legitimate at gamma = 1
    Network net;
    net.vertex_count = 4;
    net.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
    net.lengths = {1.0, 1.0, 1.0, 1.0};
    net.sources = {1.0, -1.0, 1.0, -1.0};
    const auto res = minimize_convex(net, GradientConfig{});
    const auto support = treeflow::extract_tree_support(res.conductivities, net, 1e-6);
    CHECK_FALSE(support.has_value());
    // value still matches the tree optimum (extremal points are trees)
    const auto [tree, oracle] = treeflow::brute_force_optimum(net, ModelParams{1.0, 1.0});
    CHECK(std::fabs(res.energy - oracle) <= 1e-6 * oracle);
}

TEST_CASE("iteration budget exhaustion raises a convergence error") {
    GradientConfig cfg;
    cfg.max_iters = 3;
    CHECK_THROWS_AS(minimize_convex(corpus_net("grid3"), cfg), treeflow::ConvergenceError);
}

TEST_CASE("gradient config is validated") {
    GradientConfig cfg;
    cfg.shrink = 1.5;
    CHECK_THROWS_AS(minimize_convex(corpus_net("path2"), cfg), std::invalid_argument);
    cfg = GradientConfig{};
    cfg.nu = -1.0;
    CHECK_THROWS_AS(minimize_convex(corpus_net("path2"), cfg), std::invalid_argument);
}
