#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "treeflow/energy.hpp"
#include "treeflow/errors.hpp"
#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"

namespace treeflow {

struct GradientConfig {
    double nu = 1.0;
    double c_floor = 1e-12;   // clamp for gradient evaluation only
    double initial_c = 1.0;   // uniform start; convexity makes it immaterial
    double initial_step = 1.0;
    double shrink = 0.5;
    double sufficient_decrease = 1e-4;
    double stop_rel_tol = 1e-10;
    int stop_patience = 10;   // consecutive stalled iterations before stopping
    long long max_iters = 100'000;
};

inline void validate_gradient_config(const GradientConfig& cfg) {
    if (!(cfg.nu > 0.0) || !(cfg.c_floor > 0.0) || !(cfg.initial_c > 0.0) ||
        !(cfg.initial_step > 0.0) || !(cfg.sufficient_decrease > 0.0) ||
        !(cfg.stop_rel_tol > 0.0) || cfg.stop_patience < 1 || cfg.max_iters < 1) {
        throw std::invalid_argument("GradientConfig: tolerances and counts must be positive");
    }
    if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) {
        throw std::invalid_argument("GradientConfig: shrink must lie in (0, 1)");
    }
}

struct ConvexResult {
    Conductivities conductivities;
    double energy = 0.0;
    long long iterations = 0;
    double projected_gradient_norm = 0.0;  // recorded stationarity measure
    std::vector<double> energy_trace;      // accepted objective values, non-increasing
};

namespace detail {

// Objective for the line search: +inf when the candidate conductivities
// leave some sources unreachable (the step is then simply rejected).
inline double convex_objective(const Network& net, const Conductivities& c,
                               const ModelParams& params) {
    try {
        const double e = energy_full(net, c, params);
        return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
    } catch (const SolverError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace detail

// Projected gradient descent for the gamma = 1 energy, which is convex in C.
// Iterates stay in C >= 0 by projection; the gradient is evaluated with C
// clamped to >= c_floor so the flux term stays finite, and edges pinned at 0
// with nonnegative gradient are left frozen by the projection itself.
// Armijo backtracking with the projected-step sufficient decrease
//   E(C') <= E(C) - (sigma/s) * |C' - C|^2
// keeps the objective monotone; the step is re-grown after each success.
// Stops after stop_patience consecutive iterations whose relative decrease
// falls below stop_rel_tol.
inline ConvexResult minimize_convex(const Network& net, const GradientConfig& cfg) {
    validate_gradient_config(cfg);
    const ValidationReport report = validate_network(net);
    if (!report.valid()) {
        throw std::invalid_argument("minimize_convex: invalid network: " + report.violations.front());
    }
    const ModelParams params{1.0, cfg.nu};
    const int m = net.edge_count();

    ConvexResult res;
    res.conductivities.per_edge_c.assign(m, cfg.initial_c);
    res.energy = energy_full(net, res.conductivities, params);
    res.energy_trace.push_back(res.energy);

    auto gradient_at = [&](const Conductivities& c, const FluxAssignment& q) {
        std::vector<double> g(m);
        for (int e = 0; e < m; ++e) {
            const double ce = std::max(c.per_edge_c[e], cfg.c_floor);
            const double qe = q.per_edge_flux[e];
            g[e] = (-qe * qe / (ce * ce) + cfg.nu) * net.lengths[e];
        }
        return g;
    };
    auto projected_norm = [&](const Conductivities& c, const std::vector<double>& g) {
        double acc = 0.0;
        for (int e = 0; e < m; ++e) {
            const double pg = c.per_edge_c[e] > 0.0 ? g[e] : std::min(g[e], 0.0);
            acc += pg * pg;
        }
        return std::sqrt(acc);
    };

    double step = cfg.initial_step;
    int stalled = 0;
    bool converged = false;
    Conductivities trial;
    trial.per_edge_c.assign(m, 0.0);

    while (res.iterations < cfg.max_iters) {
        ++res.iterations;
        const PressureField p = solve_kirchhoff(net, res.conductivities);
        const FluxAssignment q = fluxes_from_pressures(net, res.conductivities, p);
        const std::vector<double> g = gradient_at(res.conductivities, q);
        res.projected_gradient_norm = projected_norm(res.conductivities, g);

        double accepted_energy = res.energy;
        bool moved = false;
        for (double s = step; s >= 1e-20; s *= cfg.shrink) {
            double step_sq = 0.0;
            for (int e = 0; e < m; ++e) {
                trial.per_edge_c[e] = std::max(res.conductivities.per_edge_c[e] - s * g[e], 0.0);
                const double d = trial.per_edge_c[e] - res.conductivities.per_edge_c[e];
                step_sq += d * d;
            }
            if (step_sq == 0.0) break;  // fully frozen; no feasible move
            const double trial_energy = detail::convex_objective(net, trial, params);
            if (trial_energy <= res.energy - cfg.sufficient_decrease / s * step_sq) {
                res.conductivities.per_edge_c.swap(trial.per_edge_c);
                accepted_energy = trial_energy;
                moved = true;
                step = s * 2.0;
                break;
            }
        }

        double rel_decrease = 0.0;
        if (moved) {
            rel_decrease = (res.energy - accepted_energy) /
                           std::max(std::fabs(accepted_energy), 1e-300);
            res.energy = accepted_energy;
            res.energy_trace.push_back(res.energy);
        }
        stalled = rel_decrease < cfg.stop_rel_tol ? stalled + 1 : 0;
        if (stalled >= cfg.stop_patience) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        std::ostringstream os;
        os << "minimize_convex: no convergence within " << cfg.max_iters
           << " iterations (projected gradient norm " << res.projected_gradient_norm << ")";
        throw ConvergenceError(os.str());
    }
    return res;
}

// Reads the support {C > threshold} of a converged minimizer. When the
// support is a spanning tree the minimizer sits at an extremal point and the
// tree is returned; a non-tree support is a legitimate interior minimizer,
// reported as nullopt rather than an error.
inline std::optional<SpanningTree> extract_tree_support(const Conductivities& c,
                                                        const Network& net, double threshold) {
    std::vector<int> ids;
    for (int e = 0; e < net.edge_count(); ++e) {
        if (c.per_edge_c[e] > threshold) ids.push_back(e);
    }
    SpanningTree tree = make_spanning_tree(std::move(ids));
    if (is_spanning_tree(net, tree)) return tree;
    return std::nullopt;
}

}  // namespace treeflow
