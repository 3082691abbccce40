#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treeflow/treeflow.hpp"

namespace {

// exit codes: 0 success, 1 validation failure, 2 I/O error, 3 convergence error
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitConvergence = 3;

struct CliOptions {
    std::optional<std::string> instance;
    std::optional<std::vector<double>> gammas;
    std::optional<int> runs;
    std::optional<double> nu;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::string config_path;
};

void add_experiment_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--instance", opt.instance, "instance path or builtin:<name>");
    cmd->add_option("--gammas", opt.gammas, "comma-separated metabolic exponents in (0,1]")
        ->delimiter(',');
    cmd->add_option("--runs", opt.runs, "Monte-Carlo restarts per gamma");
    cmd->add_option("--nu", opt.nu, "metabolic coefficient");
    cmd->add_option("--seed", opt.seed, "master RNG seed (required)");
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
    cmd->add_option("--config", opt.config_path, "JSON config file (flags take precedence)");
}

// precedence: CLI flags > config file > defaults
treeflow::ExperimentConfig merge_config(const CliOptions& opt, bool out_required) {
    treeflow::ExperimentConfig cfg;
    bool seed_given = false;
    if (!opt.config_path.empty()) {
        const nlohmann::json j = treeflow::parse_json_file(opt.config_path);
        if (j.contains("instance")) cfg.instance = j.at("instance").get<std::string>();
        if (j.contains("gammas")) cfg.gammas = j.at("gammas").get<std::vector<double>>();
        if (j.contains("runs")) cfg.runs = j.at("runs").get<int>();
        if (j.contains("nu")) cfg.nu = j.at("nu").get<double>();
        if (j.contains("seed")) {
            cfg.seed = j.at("seed").get<std::uint64_t>();
            seed_given = true;
        }
        if (j.contains("out")) cfg.output_dir = j.at("out").get<std::string>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    }
    if (opt.instance) cfg.instance = *opt.instance;
    if (opt.gammas) cfg.gammas = *opt.gammas;
    if (opt.runs) cfg.runs = *opt.runs;
    if (opt.nu) cfg.nu = *opt.nu;
    if (opt.seed) {
        cfg.seed = *opt.seed;
        seed_given = true;
    }
    if (opt.out) cfg.output_dir = *opt.out;
    if (opt.threads) cfg.threads = *opt.threads;

    if (cfg.instance.empty()) throw std::invalid_argument("an instance is required");
    if (!seed_given) throw std::invalid_argument("a seed is required in experiment mode");
    if (out_required && cfg.output_dir.empty()) {
        throw std::invalid_argument("an output directory is required");
    }
    return cfg;
}

struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

treeflow::Network load_validated(const std::string& instance) {
    treeflow::Network net = treeflow::resolve_instance(instance);
    const treeflow::ValidationReport report = treeflow::validate_network(net);
    if (!report.valid()) {
        std::string msg = "instance failed validation:";
        for (const auto& v : report.violations) msg += "\n  - " + v;
        throw ValidationFailure(msg);
    }
    return net;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spanning-tree optimization of biological transport networks"};
    app.require_subcommand(1);

    CliOptions opt;
    auto* cmd_optimize = app.add_subcommand(
        "optimize", "Monte-Carlo tree descent over a gamma sweep; writes summaries and renders");
    add_experiment_options(cmd_optimize, opt);
    auto* cmd_grc = app.add_subcommand(
        "grc", "global reaching centrality of the swept optima; writes grc.json and grc.csv");
    add_experiment_options(cmd_grc, opt);
    auto* cmd_validate = app.add_subcommand(
        "validate", "gamma=1 cross-check of the tree search against the convex baseline");
    add_experiment_options(cmd_validate, opt);

    auto* cmd_generate = app.add_subcommand("generate", "write a builtin instance as JSON");
    std::string builtin_name = "leaf122";
    std::string generate_out;
    cmd_generate->add_option("--builtin", builtin_name, "builtin instance name");
    cmd_generate->add_option("--out", generate_out, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_generate->parsed()) {
            const treeflow::Network net = treeflow::resolve_instance("builtin:" + builtin_name);
            treeflow::save_network(generate_out, net);
            std::cout << "wrote " << generate_out << " (" << net.vertex_count << " vertices, "
                      << net.edge_count() << " edges)\n";
            return 0;
        }

        if (cmd_optimize->parsed()) {
            const treeflow::ExperimentConfig cfg = merge_config(opt, true);
            const treeflow::Network net = load_validated(cfg.instance);
            const auto entries = treeflow::run_optimize(net, cfg);
            for (const auto& entry : entries) {
                std::cout << "gamma=" << treeflow::format_gamma(entry.gamma)
                          << "  best=" << entry.summary.best_energy
                          << "  worst=" << entry.summary.worst_energy
                          << "  std=" << entry.summary.energy_std << "\n";
            }
            return 0;
        }

        if (cmd_grc->parsed()) {
            const treeflow::ExperimentConfig cfg = merge_config(opt, true);
            const treeflow::Network net = load_validated(cfg.instance);
            const auto rows = treeflow::run_grc(net, cfg);
            for (const auto& row : rows) {
                std::cout << "gamma=" << treeflow::format_gamma(row.gamma)
                          << "  grc_best=" << row.grc_best << "  grc_std=" << row.grc_std << "\n";
            }
            return 0;
        }

        if (cmd_validate->parsed()) {
            const treeflow::ExperimentConfig cfg = merge_config(opt, false);
            const treeflow::Network net = load_validated(cfg.instance);
            const treeflow::ValidateReport report = treeflow::run_validate(net, cfg);
            std::cout << "convex_energy=" << report.convex_energy
                      << "  best_tree_energy=" << report.best_tree_energy << "\n"
                      << "exact_fraction=" << report.exact_fraction
                      << "  within_1pct_fraction=" << report.within_1pct_fraction << "\n";
            if (!report.baseline_consistent) {
                std::cerr << "validation failed: a tree beat the convex baseline by more than "
                             "1e-8 relative (baseline under-converged?)\n";
                return kExitValidation;
            }
            return 0;
        }
    } catch (const treeflow::IoError& ex) {
        std::cerr << "I/O error: " << ex.what() << "\n";
        return kExitIo;
    } catch (const treeflow::ConvergenceError& ex) {
        std::cerr << "convergence error: " << ex.what() << "\n";
        return kExitConvergence;
    } catch (const treeflow::SolverError& ex) {
        std::cerr << "solver error: " << ex.what() << "\n";
        return kExitConvergence;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
