/**
 * @file experiments.hpp
 * @brief Seeded experiment runners behind the CLI, CSV / plot-data emission
 *        and cross-run comparison.
 *
 * Output layout of a run directory:
 *
 *     config.json         effective configuration (after overrides)
 *     metadata.json       timestamps and command line; with the wallclock_ms column of
 *                         train_log.csv, the only content that differs between reruns
 *     seed_<s>/...        per-seed CSVs
 *     aggregate.csv       across-seed aggregate
 *     plots/<curve>.txt   two-column "x y" curves, listed in plots/manifest.txt
 *
 * Every CSV begins with a "# units: ..." comment line, then the header row.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hpg/config.hpp"

namespace hpg {

struct RunOptions {
    std::optional<std::string> out_dir;
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> cap;  ///< metastability censoring cap
    std::string command_line;
};

/// Environment variable naming the root that relative output directories resolve against.
inline constexpr const char* kOutputRootVariable = "HPG_OUTPUT_ROOT";

/// Applies CLI overrides and re-validates.
ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options);

/// Resolves a relative output_dir against $HPG_OUTPUT_ROOT (when set).
std::filesystem::path resolve_output_dir(const std::string& output_dir);

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::string summary;  ///< one line
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<SeedOutcome> seeds;
};

/// Runs every seed (concurrently up to config.workers), writes all artifacts
/// and prints one summary line per seed to `log`. A failing seed aborts the
/// run with an error message naming that seed.
RunResult run_experiment(const ExperimentConfig& config, std::ostream& log, const std::string& command_line = "");

enum class CompareMetric { mean_return, rolling_mean, grad_norm };
CompareMetric compare_metric_from_string(const std::string& name);
std::string to_string(CompareMetric metric);

/// Aligns per-iteration across-seed means and 95% bootstrap intervals of
/// `metric` for each run directory and writes them to `out_csv`. With two or
/// more runs, diff_<i> columns hold run i minus run 0. Runs must share the
/// env block, train.episodes and train.eval_window; a mismatch raises
/// ConfigError naming the field.
void compare_runs(const std::vector<std::filesystem::path>& run_dirs, CompareMetric metric,
                  const std::filesystem::path& out_csv);

/// Per-iteration mean and percentile bootstrap interval across seeds. The
/// resampling stream is fixed, so results are deterministic.
struct BootstrapBand {
    std::vector<double> mean;
    std::vector<double> lower;
    std::vector<double> upper;
};
BootstrapBand bootstrap_band(const std::vector<std::vector<double>>& per_seed, std::size_t resamples = 1000,
                             double level = 0.95);

/// Minimal CSV reader for files written by this harness ('#' lines skipped).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);

}  // namespace hpg
