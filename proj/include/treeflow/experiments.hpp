#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "treeflow/centrality.hpp"
#include "treeflow/convex.hpp"
#include "treeflow/descent.hpp"
#include "treeflow/instances.hpp"
#include "treeflow/io.hpp"
#include "treeflow/network.hpp"

namespace treeflow {

struct ExperimentConfig {
    std::string instance;  // filesystem path or "builtin:<name>"
    std::vector<double> gammas = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    int runs = 1000;
    double nu = 1.0;
    std::uint64_t seed = 0;
    std::string output_dir;
    int threads = 0;  // 0 = hardware concurrency
};

inline void validate_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.gammas.empty()) throw std::invalid_argument("experiment: gammas must be nonempty");
    for (double g : cfg.gammas) {
        if (!(g > 0.0) || !(g <= 1.0)) {
            throw std::invalid_argument("experiment: every gamma must lie in (0, 1]");
        }
    }
    if (cfg.runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
    if (!(cfg.nu > 0.0)) throw std::invalid_argument("experiment: nu must be positive");
}

// "builtin:<name>" resolves against the generated instances, anything else
// is read as a Network JSON file.
inline Network resolve_instance(const std::string& spec) {
    constexpr const char* prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string name = spec.substr(std::string(prefix).size());
        if (name == "leaf122") return generate_leaf();
        for (auto& inst : canonical_instances()) {
            if (inst.name == name) return std::move(inst.net);
        }
        throw std::invalid_argument("unknown builtin instance: " + name);
    }
    return load_network(spec);
}

// Per-gamma Monte-Carlo stream seed. Mixing the gamma bits (rather than its
// position in the sweep) keeps a (seed, gamma) pair reproducible no matter
// which other gammas are swept alongside.
inline std::uint64_t gamma_stream_seed(std::uint64_t seed, double gamma) {
    return detail::mix64(seed ^ detail::mix64(std::bit_cast<std::uint64_t>(gamma)));
}

inline std::string format_gamma(double gamma) {
    return format_double(gamma);
}

inline nlohmann::json summary_to_json(double gamma, const ExperimentConfig& cfg,
                                      const Network& net, const McSummary& summary) {
    nlohmann::json j;
    j["gamma"] = gamma;
    j["nu"] = cfg.nu;
    j["runs"] = summary.runs;
    j["seed"] = cfg.seed;
    j["best_energy"] = summary.best_energy;
    j["worst_energy"] = summary.worst_energy;
    j["energy_std"] = summary.energy_std;
    j["best_run_index"] = summary.best_run_index;
    j["best_tree_edges"] = nlohmann::json::array();
    for (int e : summary.best_run.final_tree.edge_ids) {
        j["best_tree_edges"].push_back({net.edges[e].first, net.edges[e].second});
    }
    j["per_run_energies"] = summary.per_run_energies;
    return j;
}

namespace detail {

inline void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

inline std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

}  // namespace detail

struct SweepEntry {
    double gamma = 0.0;
    McSummary summary;
};

// Monte-Carlo sweep over cfg.gammas; each gamma runs cfg.runs descents.
inline std::vector<SweepEntry> run_sweep(const Network& net, const ExperimentConfig& cfg) {
    validate_experiment_config(cfg);
    std::vector<SweepEntry> entries;
    entries.reserve(cfg.gammas.size());
    for (double gamma : cfg.gammas) {
        DescentConfig dc;
        dc.params = ModelParams{gamma, cfg.nu};
        dc.seed = gamma_stream_seed(cfg.seed, gamma);
        entries.push_back({gamma, monte_carlo(net, dc, cfg.runs, cfg.threads)});
    }
    return entries;
}

// optimize: per gamma, writes summary_<gamma>.json plus network_<gamma>.dot
// (and .svg when the instance has coordinates) for the best tree found.
inline std::vector<SweepEntry> run_optimize(const Network& net, const ExperimentConfig& cfg) {
    detail::ensure_output_dir(cfg.output_dir);
    std::vector<SweepEntry> entries = run_sweep(net, cfg);
    for (const auto& entry : entries) {
        const std::string tag = format_gamma(entry.gamma);
        write_text_file(detail::join_path(cfg.output_dir, "summary_" + tag + ".json"),
                        dump_json(summary_to_json(entry.gamma, cfg, net, entry.summary)));
        const FluxAssignment q = tree_fluxes(net, entry.summary.best_run.final_tree);
        const double tol = default_flux_zero_tol(net);
        write_text_file(detail::join_path(cfg.output_dir, "network_" + tag + ".dot"),
                        render_dot(net, q, tol));
        if (net.has_coordinates()) {
            write_text_file(detail::join_path(cfg.output_dir, "network_" + tag + ".svg"),
                            render_svg(net, q, tol));
        }
    }
    return entries;
}

struct GrcEntry {
    double gamma = 0.0;
    double grc_best = 0.0;
    double grc_mean = 0.0;
    double grc_std = 0.0;
};

// grc: recomputes the sweep (deterministic, so identical to optimize's) and
// reports the GRC of each best network plus per-run mean/std. Writes
// grc.json and grc.csv.
inline std::vector<GrcEntry> run_grc(const Network& net, const ExperimentConfig& cfg) {
    detail::ensure_output_dir(cfg.output_dir);
    std::vector<SweepEntry> entries = run_sweep(net, cfg);
    std::vector<GrcEntry> rows;
    rows.reserve(entries.size());
    for (auto& entry : entries) {
        entry.summary.grc_values = per_run_grc(net, entry.summary.per_run_trees);
        GrcEntry row;
        row.gamma = entry.gamma;
        row.grc_best = entry.summary.grc_values[entry.summary.best_run_index];
        double mean = 0.0;
        for (double v : entry.summary.grc_values) mean += v;
        mean /= static_cast<double>(entry.summary.grc_values.size());
        double var = 0.0;
        for (double v : entry.summary.grc_values) var += (v - mean) * (v - mean);
        row.grc_mean = mean;
        row.grc_std = std::sqrt(var / static_cast<double>(entry.summary.grc_values.size()));
        rows.push_back(row);
    }

    nlohmann::json j;
    j["runs"] = cfg.runs;
    j["seed"] = cfg.seed;
    j["nu"] = cfg.nu;
    j["entries"] = nlohmann::json::array();
    std::ostringstream csv;
    csv << "gamma,grc_best,grc_std\n";
    for (const auto& row : rows) {
        nlohmann::json item;
        item["gamma"] = row.gamma;
        item["grc_best"] = row.grc_best;
        item["grc_mean"] = row.grc_mean;
        item["grc_std"] = row.grc_std;
        j["entries"].push_back(item);
        csv << format_double(row.gamma) << "," << format_double(row.grc_best) << ","
            << format_double(row.grc_std) << "\n";
    }
    write_text_file(detail::join_path(cfg.output_dir, "grc.json"), dump_json(j));
    write_text_file(detail::join_path(cfg.output_dir, "grc.csv"), csv.str());
    return rows;
}

struct ValidateReport {
    double convex_energy = 0.0;
    double best_tree_energy = 0.0;
    double exact_fraction = 0.0;       // runs with relative gap <= 1e-9
    double within_1pct_fraction = 0.0; // runs with relative gap <= 1e-2
    bool baseline_consistent = true;   // no tree beat the baseline by > 1e-8 rel
    int runs = 0;
};

// validate: gamma = 1 cross-check of the tree search against the convex
// baseline. Reports the fraction of runs hitting the baseline optimum
// exactly and the fraction within 1% relative gap.
inline ValidateReport run_validate(const Network& net, const ExperimentConfig& cfg) {
    if (cfg.runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
    GradientConfig gc;
    gc.nu = cfg.nu;
    const ConvexResult baseline = minimize_convex(net, gc);

    DescentConfig dc;
    dc.params = ModelParams{1.0, cfg.nu};
    dc.seed = gamma_stream_seed(cfg.seed, 1.0);
    const McSummary mc = monte_carlo(net, dc, cfg.runs, cfg.threads);

    ValidateReport report;
    report.runs = cfg.runs;
    report.convex_energy = baseline.energy;
    report.best_tree_energy = mc.best_energy;
    int exact = 0, close = 0;
    for (double e : mc.per_run_energies) {
        const double gap = (e - baseline.energy) / baseline.energy;
        if (gap <= 1e-9) ++exact;
        if (gap <= 1e-2) ++close;
    }
    report.exact_fraction = static_cast<double>(exact) / cfg.runs;
    report.within_1pct_fraction = static_cast<double>(close) / cfg.runs;
    report.baseline_consistent = !(mc.best_energy < baseline.energy * (1.0 - 1e-8));

    if (!cfg.output_dir.empty()) {
        detail::ensure_output_dir(cfg.output_dir);
        nlohmann::json j;
        j["runs"] = report.runs;
        j["seed"] = cfg.seed;
        j["nu"] = cfg.nu;
        j["convex_energy"] = report.convex_energy;
        j["best_tree_energy"] = report.best_tree_energy;
        j["exact_fraction"] = report.exact_fraction;
        j["within_1pct_fraction"] = report.within_1pct_fraction;
        j["baseline_consistent"] = report.baseline_consistent;
        write_text_file(detail::join_path(cfg.output_dir, "validate.json"), dump_json(j));
    }
    return report;
}

}  // namespace treeflow
