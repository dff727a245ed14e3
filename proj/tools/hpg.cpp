// hpg: command-line entry point for the heavy-tailed policy gradient toolkit.
//
//   hpg run <config.json>                 kind taken from the config
//   hpg train|tail-trace|exit-time|transition|occupancy <config.json>
//   hpg tail-trace --samples <file.csv> [--column name] [--k1 n --k2 n]
//   hpg compare <run_dir>... [--metric rolling_mean] [--out compare.csv]
//
// Exit status: 0 success, 2 invalid configuration or usage, 1 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hpg/config.hpp"
#include "hpg/experiments.hpp"
#include "hpg/tail_index.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> cap;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
    auto* opt = cmd->add_option("config", f.config_path, "Experiment config (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--seed-override", f.seeds, "Replace the config seed list")->delimiter(',');
    cmd->add_option("--workers", f.workers, "Seeds run concurrently");
    cmd->add_option("--out-dir", f.out_dir, "Output directory (overrides output_dir)");
    cmd->add_option("--cap", f.cap, "Censoring cap for metastability runs");
}

int run_config(const CommonFlags& f, std::optional<hpg::ExperimentKind> kind, const std::string& command_line) {
    auto config = hpg::load_config(f.config_path, kind);
    hpg::RunOptions opts;
    opts.out_dir = f.out_dir;
    if (!f.seeds.empty()) opts.seeds = f.seeds;
    opts.workers = f.workers;
    opts.cap = f.cap;
    config = hpg::apply_overrides(std::move(config), opts);
    const auto result = hpg::run_experiment(config, std::cout, command_line);
    std::cout << "wrote " << result.directory.string() << "\n";
    return 0;
}

int tail_from_samples(const std::string& path, const std::string& column, std::optional<std::size_t> k1,
                      std::optional<std::size_t> k2) {
    const auto table = hpg::read_csv(path);
    const std::string name = column.empty() ? table.header.at(0) : column;
    const auto samples = table.column(name);
    hpg::TailIndexEstimate e;
    if (k1 && k2) {
        e = hpg::estimate_alpha(samples, *k1, *k2);
    } else if (k1 || k2) {
        throw hpg::ConfigError("--k1/--k2", "give both block parameters or neither");
    } else {
        e = hpg::estimate_alpha(samples);
    }
    std::cout << "# units: alpha_hat [tail index], inverse_alpha [1], k1 [block length], k2 [block count], "
                 "n_samples [count], zeros_dropped [count], clamped [0/1], unreliable [0/1]\n"
              << "alpha_hat,inverse_alpha,k1,k2,n_samples,zeros_dropped,clamped,unreliable\n"
              << hpg::format_number(e.alpha_hat) << "," << hpg::format_number(e.inverse_alpha) << "," << e.k1 << ","
              << e.k2 << "," << e.n_samples << "," << e.zeros_dropped << "," << e.clamped << "," << e.unreliable << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heavy-tailed policy gradient experiments"};
    app.require_subcommand(1);

    std::string command_line;
    for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "Run the experiment named by the config's kind");
    add_common(run, run_flags, true);

    struct Named {
        const char* name;
        hpg::ExperimentKind kind;
        const char* help;
    };
    const std::vector<Named> named{
        {"train", hpg::ExperimentKind::train, "Train policies and log returns"},
        {"tail-trace", hpg::ExperimentKind::tail_trace, "Train and trace the gradient tail index"},
        {"exit-time", hpg::ExperimentKind::exit_time, "Exit-time Monte Carlo and scaling fits"},
        {"transition", hpg::ExperimentKind::transition, "Transition Monte Carlo"},
        {"occupancy", hpg::ExperimentKind::occupancy, "Train, then histogram visited states"},
    };
    std::vector<CommonFlags> named_flags(named.size());
    std::vector<CLI::App*> named_cmds;
    for (std::size_t i = 0; i < named.size(); ++i) {
        auto* cmd = app.add_subcommand(named[i].name, named[i].help);
        add_common(cmd, named_flags[i], named[i].kind != hpg::ExperimentKind::tail_trace);
        named_cmds.push_back(cmd);
    }
    std::string samples_path, samples_column;
    std::optional<std::size_t> k1, k2;
    auto* tail_cmd = named_cmds[1];
    tail_cmd->add_option("--samples", samples_path, "CSV file of samples (estimate instead of training)");
    tail_cmd->add_option("--column", samples_column, "Column of the samples file (default: first)");
    tail_cmd->add_option("--k1", k1, "Block length");
    tail_cmd->add_option("--k2", k2, "Block count");

    std::vector<std::string> compare_dirs;
    std::string metric = "rolling_mean";
    std::string compare_out = "compare.csv";
    auto* compare = app.add_subcommand("compare", "Compare training runs across seeds");
    compare->add_option("runs", compare_dirs, "Run directories")->required();
    compare->add_option("--metric", metric, "mean_return, rolling_mean or grad_norm");
    compare->add_option("--out", compare_out, "Output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) return run_config(run_flags, std::nullopt, command_line);
        for (std::size_t i = 0; i < named.size(); ++i) {
            if (!*named_cmds[i]) continue;
            if (named[i].kind == hpg::ExperimentKind::tail_trace && !samples_path.empty()) {
                return tail_from_samples(samples_path, samples_column, k1, k2);
            }
            if (named_flags[i].config_path.empty()) {
                throw hpg::ConfigError("config", "a config path (or --samples) is required");
            }
            return run_config(named_flags[i], named[i].kind, command_line);
        }
        if (*compare) {
            std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
            const auto out = hpg::resolve_output_dir(compare_out);
            if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
            hpg::compare_runs(dirs, hpg::compare_metric_from_string(metric), out);
            std::cout << "wrote " << out.string() << "\n";
            return 0;
        }
    } catch (const hpg::ConfigError& e) {
        std::cerr << "hpg: invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hpg: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
