#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "treeflow/errors.hpp"
#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"

namespace treeflow {

struct ModelParams {
    double gamma = 1.0;  // metabolic exponent, in (0, 1]
    double nu = 1.0;     // metabolic coefficient, > 0
};

inline void validate_params(const ModelParams& p) {
    if (!(p.gamma > 0.0) || !(p.gamma <= 1.0)) {
        throw std::domain_error("ModelParams: gamma must lie in (0, 1]");
    }
    if (!(p.nu > 0.0)) {
        throw std::domain_error("ModelParams: nu must be positive");
    }
}

// Per-edge conductivities; C = 0 marks an inactive edge.
struct Conductivities {
    std::vector<double> per_edge_c;
};

// Per-vertex pressures, gauge-fixed to 0 at the lowest-indexed vertex of
// each active component (vertices with no active edge also sit at 0).
struct PressureField {
    std::vector<double> per_vertex_p;
};

// Exponent and prefactor of the optimal-energy closed form. Substituting the
// stationary conductivity C = (Q^2/nu)^{1/(gamma+1)} into the energy
// collapses both terms to K * |Q|^alpha per unit length with
//   alpha = 2*gamma/(gamma+1),   K = (1 + 1/gamma) * nu^{1/(gamma+1)}.
// At gamma = 1 this reduces to the familiar K = 2*sqrt(nu), alpha = 1.
inline double flux_exponent(const ModelParams& p) {
    return 2.0 * p.gamma / (p.gamma + 1.0);
}

inline double energy_prefactor(const ModelParams& p) {
    return (1.0 + 1.0 / p.gamma) * std::pow(p.nu, 1.0 / (p.gamma + 1.0));
}

namespace detail {

inline double pow_abs(double q, double alpha) {
    const double a = std::fabs(q);
    if (a == 0.0) return 0.0;
    return alpha == 1.0 ? a : std::pow(a, alpha);
}

// In-place Cholesky factorization of a dense row-major SPD matrix.
// Returns false when a pivot fails (matrix not numerically SPD).
inline bool cholesky_factor(std::vector<double>& a, int n) {
    for (int k = 0; k < n; ++k) {
        double d = a[k * n + k];
        for (int i = 0; i < k; ++i) d -= a[k * n + i] * a[k * n + i];
        if (!(d > 0.0)) return false;
        d = std::sqrt(d);
        a[k * n + k] = d;
        for (int r = k + 1; r < n; ++r) {
            double s = a[r * n + k];
            for (int i = 0; i < k; ++i) s -= a[r * n + i] * a[k * n + i];
            a[r * n + k] = s / d;
        }
    }
    return true;
}

// Solves L L^T x = b with the factor stored in the lower triangle; b is
// overwritten by the solution.
inline void cholesky_solve(const std::vector<double>& a, int n, std::vector<double>& b) {
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
}

inline std::string join_ids(const std::vector<int>& ids, std::size_t limit = 8) {
    std::ostringstream os;
    for (std::size_t k = 0; k < ids.size() && k < limit; ++k) {
        if (k) os << ", ";
        os << ids[k];
    }
    if (ids.size() > limit) os << ", ...";
    return os.str();
}

}  // namespace detail

// Largest per-vertex violation of the nodal balance
// sum_j C_ij (P_i - P_j)/L_ij = S_i.
inline double kirchhoff_residual(const Network& net, const Conductivities& c,
                                 const PressureField& p) {
    std::vector<double> out(net.vertex_count, 0.0);
    for (int e = 0; e < net.edge_count(); ++e) {
        const double ce = c.per_edge_c[e];
        if (ce <= 0.0) continue;
        auto [i, j] = net.edges[e];
        const double q = ce * (p.per_vertex_p[i] - p.per_vertex_p[j]) / net.lengths[e];
        out[i] += q;
        out[j] -= q;
    }
    double worst = 0.0;
    for (int v = 0; v < net.vertex_count; ++v) {
        worst = std::max(worst, std::fabs(out[v] - net.sources[v]));
    }
    return worst;
}

// Solves the nodal balance equations for the pressures on the active
// subgraph (edges with C > 0). The weighted Laplacian is singular with one
// constant mode per active component, so the lowest-indexed vertex of each
// component is pinned to P = 0 and the reduced SPD system is factorized
// densely. Throws SolverError when a component's sources do not balance
// (isolated sources included) or the residual check fails afterwards.
inline PressureField solve_kirchhoff(const Network& net, const Conductivities& c) {
    const int n = net.vertex_count;
    if (static_cast<int>(c.per_edge_c.size()) != net.edge_count()) {
        throw std::invalid_argument("solve_kirchhoff: conductivity array not aligned with edges");
    }
    const double tol = 1e-10 * std::max(1.0, max_abs_source(net));

    detail::UnionFind uf(n);
    for (int e = 0; e < net.edge_count(); ++e) {
        if (c.per_edge_c[e] > 0.0) {
            auto [i, j] = net.edges[e];
            uf.unite(i, j);
        }
    }

    std::map<int, std::vector<int>> components;
    for (int v = 0; v < n; ++v) components[uf.find(v)].push_back(v);

    std::vector<int> index(n, -1);  // row in the reduced system, -1 = pinned
    int rows = 0;
    for (auto& [root, members] : components) {
        double balance = 0.0;
        for (int v : members) balance += net.sources[v];
        if (std::fabs(balance) > 0.5 * tol) {
            std::ostringstream os;
            if (members.size() == 1) {
                os << "solve_kirchhoff: isolated source at vertex " << members[0];
            } else {
                os << "solve_kirchhoff: active component {" << detail::join_ids(members)
                   << "} has unbalanced sources (sum = " << balance << ")";
            }
            throw SolverError(os.str(), members);
        }
        // members are ascending, so members[0] is the pinned gauge vertex
        for (std::size_t k = 1; k < members.size(); ++k) index[members[k]] = rows++;
    }

    PressureField p;
    p.per_vertex_p.assign(n, 0.0);
    if (rows == 0) return p;

    std::vector<double> a(static_cast<std::size_t>(rows) * rows, 0.0);
    std::vector<double> b(rows, 0.0);
    for (int v = 0; v < n; ++v) {
        if (index[v] >= 0) b[index[v]] = net.sources[v];
    }
    for (int e = 0; e < net.edge_count(); ++e) {
        const double ce = c.per_edge_c[e];
        if (ce <= 0.0) continue;
        auto [i, j] = net.edges[e];
        const double w = ce / net.lengths[e];
        const int ri = index[i], rj = index[j];
        if (ri >= 0) a[static_cast<std::size_t>(ri) * rows + ri] += w;
        if (rj >= 0) a[static_cast<std::size_t>(rj) * rows + rj] += w;
        if (ri >= 0 && rj >= 0) {
            a[static_cast<std::size_t>(ri) * rows + rj] -= w;
            a[static_cast<std::size_t>(rj) * rows + ri] -= w;
        }
    }

    std::vector<double> factor(a);
    if (!detail::cholesky_factor(factor, rows)) {
        throw SolverError("solve_kirchhoff: reduced system is not positive definite");
    }
    std::vector<double> x(b);
    detail::cholesky_solve(factor, rows, x);

    // one round of iterative refinement if the raw solve is not tight enough
    for (int round = 0; round < 2; ++round) {
        std::vector<double> r(b);
        double worst = 0.0;
        for (int i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (int k = 0; k < rows; ++k) acc += a[static_cast<std::size_t>(i) * rows + k] * x[k];
            r[i] -= acc;
            worst = std::max(worst, std::fabs(r[i]));
        }
        if (worst <= 0.25 * tol) break;
        detail::cholesky_solve(factor, rows, r);
        for (int i = 0; i < rows; ++i) x[i] += r[i];
    }

    for (int v = 0; v < n; ++v) {
        if (index[v] >= 0) p.per_vertex_p[v] = x[index[v]];
    }

    if (kirchhoff_residual(net, c, p) > tol) {
        throw SolverError("solve_kirchhoff: residual check failed after solve");
    }
    return p;
}

// Poiseuille fluxes Q = C (P_i - P_j) / L in the stored orientation.
inline FluxAssignment fluxes_from_pressures(const Network& net, const Conductivities& c,
                                            const PressureField& p) {
    FluxAssignment q;
    q.per_edge_flux.assign(net.edge_count(), 0.0);
    for (int e = 0; e < net.edge_count(); ++e) {
        const double ce = c.per_edge_c[e];
        if (ce <= 0.0) continue;
        auto [i, j] = net.edges[e];
        q.per_edge_flux[e] = ce * (p.per_vertex_p[i] - p.per_vertex_p[j]) / net.lengths[e];
    }
    return q;
}

// Energy at given pressures: sum over edges of (Q^2/C + (nu/gamma) C^gamma) L,
// with inactive edges (C = 0, hence Q = 0) contributing nothing.
inline double energy_with_pressures(const Network& net, const Conductivities& c,
                                    const ModelParams& params, const PressureField& p) {
    validate_params(params);
    double energy = 0.0;
    for (int e = 0; e < net.edge_count(); ++e) {
        const double ce = c.per_edge_c[e];
        if (ce <= 0.0) continue;
        auto [i, j] = net.edges[e];
        const double q = ce * (p.per_vertex_p[i] - p.per_vertex_p[j]) / net.lengths[e];
        energy += (q * q / ce + params.nu / params.gamma * std::pow(ce, params.gamma)) * net.lengths[e];
    }
    return energy;
}

inline double energy_full(const Network& net, const Conductivities& c, const ModelParams& params) {
    validate_params(params);
    const PressureField p = solve_kirchhoff(net, c);
    return energy_with_pressures(net, c, params, p);
}

// Stationary conductivity for a prescribed flux: C = (Q^2/nu)^{1/(gamma+1)};
// zero-flux edges stay inactive.
inline Conductivities optimal_conductivity(const FluxAssignment& q, const ModelParams& params) {
    validate_params(params);
    Conductivities c;
    c.per_edge_c.assign(q.per_edge_flux.size(), 0.0);
    const double inv = 1.0 / (params.gamma + 1.0);
    for (std::size_t e = 0; e < q.per_edge_flux.size(); ++e) {
        const double flux = q.per_edge_flux[e];
        if (flux != 0.0) c.per_edge_c[e] = std::pow(flux * flux / params.nu, inv);
    }
    return c;
}

// Optimal energy of a conservation-satisfying flux pattern:
// K * sum_e |Q_e|^alpha L_e (see flux_exponent/energy_prefactor above).
inline double energy_tree_optimal(const Network& net, const FluxAssignment& q,
                                  const ModelParams& params) {
    validate_params(params);
    const double alpha = flux_exponent(params);
    double sum = 0.0;
    for (int e = 0; e < net.edge_count(); ++e) {
        sum += detail::pow_abs(q.per_edge_flux[e], alpha) * net.lengths[e];
    }
    return energy_prefactor(params) * sum;
}

// Analytic energy derivative dE/dC_e = (-Q_e^2/C_e^2 + nu C_e^{gamma-1}) L_e
// with Q recomputed at the given conductivities. C must be strictly positive
// on every edge: gamma <= 1 makes the metabolic term singular at C = 0.
inline std::vector<double> energy_gradient(const Network& net, const Conductivities& c,
                                           const ModelParams& params) {
    validate_params(params);
    for (int e = 0; e < net.edge_count(); ++e) {
        if (!(c.per_edge_c[e] > 0.0)) {
            throw std::domain_error("energy_gradient: conductivity must be positive on every edge");
        }
    }
    const PressureField p = solve_kirchhoff(net, c);
    const FluxAssignment q = fluxes_from_pressures(net, c, p);
    std::vector<double> grad(net.edge_count());
    for (int e = 0; e < net.edge_count(); ++e) {
        const double ce = c.per_edge_c[e];
        const double qe = q.per_edge_flux[e];
        grad[e] = (-qe * qe / (ce * ce) + params.nu * std::pow(ce, params.gamma - 1.0)) * net.lengths[e];
    }
    return grad;
}

}  // namespace treeflow
