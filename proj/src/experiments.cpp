#include "hpg/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "hpg/errors.hpp"
#include "hpg/estimator.hpp"
#include "hpg/tail_index.hpp"
#include "parallel.hpp"

namespace hpg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(std::uint64_t v, int) { return std::to_string(v); }

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::string& units, const std::vector<std::string>& header)
        : out_(path), path_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << "# units: " << units << "\n";
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

    ~CsvWriter() { out_.flush(); }

private:
    std::ofstream out_;
    fs::path path_;
};

struct PlotEntry {
    std::string file;
    std::string x_label;
    std::string y_label;
    std::string description;
};

class PlotSet {
public:
    explicit PlotSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void curve(const std::string& file, const std::string& x_label, const std::string& y_label,
               const std::string& description, const std::vector<double>& x, const std::vector<double>& y) {
        std::ofstream out(dir_ / file);
        out << "# " << x_label << " " << y_label << "\n";
        for (std::size_t i = 0; i < x.size(); ++i) out << format_number(x[i]) << " " << format_number(y[i]) << "\n";
        entries_.push_back({file, x_label, y_label, description});
    }

    void write_manifest() const {
        std::ofstream out(dir_ / "manifest.txt");
        out << "# file\tx\ty\tdescription\n";
        for (const auto& e : entries_) out << e.file << "\t" << e.x_label << "\t" << e.y_label << "\t" << e.description << "\n";
    }

private:
    fs::path dir_;
    std::vector<PlotEntry> entries_;
};

std::string iso_time(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

fs::path seed_dir(const fs::path& root, std::uint64_t seed) { return root / ("seed_" + std::to_string(seed)); }

constexpr const char* kTrainLogUnits =
    "iteration [count], mean_return [undiscounted reward per trajectory], grad_norm [norm of applied gradient], "
    "eta [step size], wallclock_ms [milliseconds], rolling_mean [reward, trailing eval_window mean]";
const std::vector<std::string> kTrainLogHeader{"iteration", "mean_return", "grad_norm", "eta", "wallclock_ms", "rolling_mean"};

void write_train_log(const fs::path& path, const TrainLog& log) {
    CsvWriter csv(path, kTrainLogUnits, kTrainLogHeader);
    for (const auto& r : log.records) {
        csv.row({fmt(r.iteration), fmt(r.mean_return), fmt(r.grad_norm), fmt(r.eta), fmt(r.wallclock_ms), fmt(r.rolling_mean)});
    }
}

void write_final_params(const fs::path& path, const PolicyParams& params, const TrainLog& log) {
    json j;
    j["x"] = params.x;
    j["y"] = params.y;
    j["clip_events"] = log.clip_events;
    j["truncated_trajectories"] = log.truncated_trajectories;
    j["total_trajectories"] = log.total_trajectories;
    std::ofstream(path) << j.dump(2) << "\n";
}

// ----------------------------------------------------------------- per-seed work

struct TrainSeedData {
    TrainLog log;
    PolicyParams params;
    std::vector<TailTracePoint> trace;
    std::vector<double> occupancy;
};

TrainSeedData run_training_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
    const auto env = make_environment(c.env);
    const Policy policy = make_policy(c.policy);
    const PolicyParams init = make_initial_params(c.policy, policy);
    const TrainConfig tc = make_train_config(c.train, seed);

    TrainSeedData data;
    GradientTailTracer tracer(c.tail.window);
    GradientHook hook;
    if (c.kind == ExperimentKind::tail_trace) {
        const bool frozen = !policy.kind().variable_scale;
        hook = [&](std::size_t k, std::span<const double> g) {
            // a frozen scale entry is identically zero and carries no tail information
            tracer(k, frozen ? g.first(g.size() - 1) : g);
        };
    }
    auto result = train(*env, policy, init, tc, hook);
    data.log = std::move(result.log);
    data.params = std::move(result.params);
    write_train_log(dir / "train_log.csv", data.log);
    write_final_params(dir / "final_params.json", data.params, data.log);

    if (c.kind == ExperimentKind::tail_trace) {
        data.trace = tracer.trace();
        CsvWriter csv(dir / "tail_trace.csv",
                      "episode [iteration index], alpha_hat [tail index, nan marks a gap], n_samples [count]",
                      {"episode", "alpha_hat", "n_samples"});
        for (const auto& p : data.trace) csv.row({fmt(p.episode), fmt(p.alpha_hat), fmt(p.n_samples)});
    }
    if (c.kind == ExperimentKind::occupancy) {
        std::vector<std::vector<double>> visits;
        // evaluation streams sit above every training stream of this seed
        const std::uint64_t base = static_cast<std::uint64_t>(c.train.episodes) * c.train.batch;
        for (std::size_t e = 0; e < c.occupancy.eval_episodes; ++e) {
            SeededStream stream(seed, base + e);
            visits.push_back(run_episode(*env, policy, data.params, stream).states);
        }
        data.occupancy = occupancy_histogram(visits, c.occupancy.bins, env->state_lower(), env->state_upper());
        CsvWriter csv(dir / "occupancy.csv", "bin [index], lower [state], upper [state], frequency [fraction of visits]",
                      {"bin", "lower", "upper", "frequency"});
        const double width = (env->state_upper() - env->state_lower()) / static_cast<double>(c.occupancy.bins);
        for (std::size_t b = 0; b < data.occupancy.size(); ++b) {
            csv.row({fmt(b), fmt(env->state_lower() + width * static_cast<double>(b)),
                     fmt(env->state_lower() + width * static_cast<double>(b + 1)), fmt(data.occupancy[b])});
        }
    }
    return data;
}

double radius_for(const MetastabilityBlock& m, std::size_t alpha_index) {
    return m.a.size() == 1 ? m.a[0] : m.a[alpha_index];
}

struct FitRow {
    double alpha = 0.0;
    double slope = std::nan("");
    double stderr_slope = std::nan("");
    double r2 = std::nan("");
    std::string law = "unavailable";
    double power_rms = std::nan("");
    double exponential_rms = std::nan("");
};

struct ExitSeedData {
    std::vector<ExitCellSummary> cells;
    std::vector<FitRow> fits;
};

ExitSeedData run_exit_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir, std::ostream& diag,
                           std::mutex& diag_mutex) {
    const auto& m = c.metastability;
    const Landscape landscape = make_landscape(m.landscape);
    ExitSeedData data;
    CsvWriter records(dir / "exit_times.csv",
                      "alpha [tail index], epsilon [jump coefficient], a [ball radius], run [index], exit_step "
                      "[iterations, equals cap when censored], censored [0/1], exit_sign [+1/-1 along r, 0 when censored], "
                      "tube [+1/-1 Omega tube, 0 outside], eta [step size]",
                      {"alpha", "epsilon", "a", "run", "exit_step", "censored", "exit_sign", "tube", "eta"});
    const std::size_t cells_per_alpha = std::max<std::size_t>(m.epsilons.size(), 1);
    for (std::size_t ai = 0; ai < m.alphas.size(); ++ai) {
        ExitTimeConfig ec;
        ec.well = m.well;
        ec.alpha = m.alphas[ai];
        ec.eta = m.eta;
        ec.epsilons = m.epsilons;
        ec.a = radius_for(m, ai);
        ec.runs = m.runs;
        ec.cap = m.cap;
        ec.tube_halfwidth = m.tube_halfwidth;
        ec.seed = seed;
        ec.first_stream_id = static_cast<std::uint64_t>(ai) * cells_per_alpha * m.runs;
        const auto study = measure_exit_time(landscape, ec);
        for (const auto& r : study.records) {
            records.row({fmt(r.alpha), fmt(r.epsilon), fmt(r.a), fmt(r.run), fmt(r.exit_step, 0),
                         r.censored ? "1" : "0", std::to_string(r.exit_sign), std::to_string(r.tube), fmt(r.eta)});
        }
        data.cells.insert(data.cells.end(), study.cells.begin(), study.cells.end());

        FitRow row;
        row.alpha = ec.alpha;
        try {
            const std::size_t min_unc = std::min<std::size_t>(200, m.runs);
            const auto expo = fit_exponential_law(study.records, CensoringPolicy::exclude, min_unc);
            row.power_rms = expo.power_law_residual_rms;
            row.exponential_rms = expo.exponential_residual_rms;
            if (ec.alpha >= 2.0) {
                row.law = "exponential";
                row.slope = expo.slope;
                row.r2 = expo.r2;
            } else {
                const auto fit = fit_scaling_exponent(study.records, CensoringPolicy::exclude, min_unc);
                row.law = "power";
                row.slope = fit.slope;
                row.stderr_slope = fit.stderr_slope;
                row.r2 = fit.r2;
            }
        } catch (const DomainError& e) {
            std::lock_guard lock(diag_mutex);
            diag << "[hpg] seed " << seed << " alpha " << ec.alpha << ": no scaling fit (" << e.what() << ")\n";
        }
        data.fits.push_back(row);
    }
    {
        CsvWriter cells(dir / "exit_cells.csv",
                        "alpha [tail index], epsilon [jump coefficient], a [ball radius], runs [count], uncensored "
                        "[count], mean_exit [iterations], median_exit [iterations], censored_fraction [fraction], usable [0/1]",
                        {"alpha", "epsilon", "a", "runs", "uncensored", "mean_exit", "median_exit", "censored_fraction", "usable"});
        std::size_t idx = 0;
        for (std::size_t ai = 0; ai < m.alphas.size(); ++ai) {
            for (std::size_t k = 0; k < cells_per_alpha; ++k, ++idx) {
                const auto& cl = data.cells[idx];
                cells.row({fmt(cl.alpha), fmt(cl.epsilon), fmt(radius_for(m, ai)), fmt(cl.runs), fmt(cl.uncensored),
                           fmt(cl.mean_exit), fmt(cl.median_exit), fmt(cl.censored_fraction), cl.usable ? "1" : "0"});
            }
        }
    }
    CsvWriter fits(dir / "fit_summary.csv",
                   "alpha [tail index], slope [d log E tau / d log(1/eps) for law=power; d log E tau / d eps^-2 for "
                   "law=exponential], stderr [slope units], r2 [1], law [fit model], power_law_residual_rms [log "
                   "iterations], exponential_residual_rms [log iterations]",
                   {"alpha", "slope", "stderr", "r2", "law", "power_law_residual_rms", "exponential_residual_rms"});
    for (const auto& f : data.fits) {
        fits.row({fmt(f.alpha), fmt(f.slope), fmt(f.stderr_slope), fmt(f.r2), f.law, fmt(f.power_rms), fmt(f.exponential_rms)});
    }
    return data;
}

struct TransitionSeedData {
    std::vector<TransitionStudy> studies;  ///< one per alpha
};

TransitionSeedData run_transition_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir) {
    const auto& m = c.metastability;
    const Landscape landscape = make_landscape(m.landscape);
    TransitionSeedData data;
    CsvWriter records(dir / "transitions.csv",
                      "alpha [tail index], run [index], start_well [index], arrival_well [index, -1 when censored], "
                      "transition_step [iterations, equals cap when censored], direction [+1 right, -1 left, 0 censored]",
                      {"alpha", "run", "start_well", "arrival_well", "transition_step", "direction"});
    for (std::size_t ai = 0; ai < m.alphas.size(); ++ai) {
        TransitionConfig tc;
        tc.start_well = m.start_well;
        tc.alpha = m.alphas[ai];
        tc.eta = m.eta;
        tc.epsilon = m.epsilon;
        tc.a = radius_for(m, ai);
        tc.runs = m.runs;
        tc.cap = m.cap;
        tc.seed = seed;
        tc.first_stream_id = static_cast<std::uint64_t>(ai) * m.runs;
        auto study = measure_transition(landscape, tc);
        for (const auto& r : study.records) {
            records.row({fmt(tc.alpha), fmt(r.run), fmt(r.start_well),
                         r.arrival_well ? std::to_string(*r.arrival_well) : "-1", fmt(r.transition_step, 0),
                         std::to_string(r.direction)});
        }
        data.studies.push_back(std::move(study));
    }
    CsvWriter summary(dir / "transition_summary.csv",
                      "alpha [tail index], right [count], left [count], censored [count], right_probability [fraction of "
                      "arrivals], theoretical_ratio [fraction], censored_fraction [fraction]",
                      {"alpha", "right", "left", "censored", "right_probability", "theoretical_ratio", "censored_fraction"});
    for (std::size_t ai = 0; ai < m.alphas.size(); ++ai) {
        const auto& s = data.studies[ai];
        summary.row({fmt(m.alphas[ai]), fmt(s.right), fmt(s.left), fmt(s.censored), fmt(s.right_probability),
                     fmt(s.theoretical_ratio), fmt(s.censored_fraction)});
    }
    return data;
}

std::vector<double> iota_doubles(std::size_t n, double start = 0.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
    return v;
}

}  // namespace

// ----------------------------------------------------------------- public API

ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options) {
    if (options.out_dir) config.output_dir = *options.out_dir;
    if (options.seeds) config.seeds = *options.seeds;
    if (options.workers) config.workers = *options.workers;
    if (options.cap) config.metastability.cap = *options.cap;
    config.validate();
    return config;
}

fs::path resolve_output_dir(const std::string& output_dir) {
    fs::path p(output_dir);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv(kOutputRootVariable); root && *root) return fs::path(root) / p;
    return p;
}

BootstrapBand bootstrap_band(const std::vector<std::vector<double>>& per_seed, std::size_t resamples, double level) {
    BootstrapBand band;
    if (per_seed.empty()) return band;
    const std::size_t n = per_seed.size();
    std::size_t len = per_seed[0].size();
    for (const auto& s : per_seed) len = std::min(len, s.size());
    band.mean.assign(len, 0.0);
    band.lower.assign(len, 0.0);
    band.upper.assign(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        double sum = 0.0;
        for (const auto& s : per_seed) sum += s[t];
        band.mean[t] = sum / static_cast<double>(n);
    }
    if (n == 1) {
        band.lower = band.mean;
        band.upper = band.mean;
        return band;
    }
    // resample seed indices once and reuse them for every iteration
    SeededStream stream(0, 0);
    std::vector<std::vector<std::size_t>> picks(resamples, std::vector<std::size_t>(n));
    for (auto& p : picks) {
        for (auto& i : p) i = static_cast<std::size_t>(stream.uniform() * static_cast<double>(n)) % n;
    }
    const double tail = 0.5 * (1.0 - level);
    std::vector<double> stats(resamples);
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t b = 0; b < resamples; ++b) {
            double sum = 0.0;
            for (std::size_t i : picks[b]) sum += per_seed[i][t];
            stats[b] = sum / static_cast<double>(n);
        }
        std::sort(stats.begin(), stats.end());
        const auto at = [&](double q) {
            const double pos = q * static_cast<double>(resamples - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const auto hi = std::min(lo + 1, resamples - 1);
            return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
        };
        band.lower[t] = at(tail);
        band.upper[t] = at(1.0 - tail);
    }
    return band;
}

RunResult run_experiment(const ExperimentConfig& config, std::ostream& log, const std::string& command_line) {
    config.validate();
    const auto started = std::chrono::system_clock::now();
    RunResult result;
    result.directory = resolve_output_dir(config.output_dir);
    fs::create_directories(result.directory);
    std::ofstream(result.directory / "config.json") << serialize_config(config).dump(2) << "\n";

    const std::size_t n = config.seeds.size();
    std::vector<TrainSeedData> train_data(n);
    std::vector<ExitSeedData> exit_data(n);
    std::vector<TransitionSeedData> transition_data(n);
    std::vector<std::string> summaries(n);
    std::vector<std::string> failures(n);
    std::mutex diag_mutex;

    detail::parallel_for(n, config.workers, [&](std::size_t i) {
        const std::uint64_t seed = config.seeds[i];
        const fs::path dir = seed_dir(result.directory, seed);
        try {
            fs::create_directories(dir);
            std::ostringstream line;
            line << "seed " << seed << ": ";
            switch (config.kind) {
                case ExperimentKind::train:
                case ExperimentKind::tail_trace:
                case ExperimentKind::occupancy: {
                    train_data[i] = run_training_seed(config, seed, dir);
                    const auto& recs = train_data[i].log.records;
                    line << to_string(config.kind) << " " << recs.size() << " iterations, final rolling_mean "
                         << recs.back().rolling_mean << ", clip events " << train_data[i].log.clip_events;
                    if (config.kind == ExperimentKind::tail_trace) {
                        const auto& tr = train_data[i].trace;
                        line << ", final alpha_hat " << (tr.empty() ? std::nan("") : tr.back().alpha_hat);
                    }
                    break;
                }
                case ExperimentKind::exit_time: {
                    exit_data[i] = run_exit_seed(config, seed, dir, std::cerr, diag_mutex);
                    line << "exit_time";
                    for (const auto& f : exit_data[i].fits) line << " | alpha " << f.alpha << " " << f.law << " slope " << f.slope << " r2 " << f.r2;
                    break;
                }
                case ExperimentKind::transition: {
                    transition_data[i] = run_transition_seed(config, seed, dir);
                    line << "transition";
                    const auto& m = config.metastability;
                    for (std::size_t a = 0; a < m.alphas.size(); ++a) {
                        const auto& s = transition_data[i].studies[a];
                        line << " | alpha " << m.alphas[a] << " P(right) " << s.right_probability << " theory "
                             << s.theoretical_ratio << " censored " << s.censored_fraction;
                    }
                    break;
                }
            }
            summaries[i] = line.str();
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (!failures[i].empty()) {
            throw std::runtime_error("seed " + std::to_string(config.seeds[i]) + " failed: " + failures[i]);
        }
        log << summaries[i] << "\n";
        result.seeds.push_back({config.seeds[i], summaries[i]});
    }

    PlotSet plots(result.directory / "plots");
    switch (config.kind) {
        case ExperimentKind::train:
        case ExperimentKind::tail_trace:
        case ExperimentKind::occupancy: {
            std::vector<std::vector<double>> ret, roll, grad;
            for (std::size_t i = 0; i < n; ++i) {
                ret.push_back(train_data[i].log.mean_returns());
                grad.push_back(train_data[i].log.grad_norms());
                std::vector<double> r;
                for (const auto& rec : train_data[i].log.records) r.push_back(rec.rolling_mean);
                roll.push_back(std::move(r));
                plots.curve("rolling_mean_seed_" + std::to_string(config.seeds[i]) + ".txt", "iteration", "rolling_mean",
                            "trailing-window mean return, seed " + std::to_string(config.seeds[i]),
                            iota_doubles(roll.back().size()), roll.back());
            }
            const auto bret = bootstrap_band(ret);
            const auto broll = bootstrap_band(roll);
            const auto bgrad = bootstrap_band(grad);
            {
                CsvWriter csv(result.directory / "aggregate.csv",
                              "iteration [count]; mean_return_* and rolling_mean_* [reward, across-seed mean and 95% "
                              "bootstrap interval]; grad_norm_mean [gradient norm]; n_seeds [count]",
                              {"iteration", "mean_return_mean", "mean_return_lo", "mean_return_hi", "rolling_mean_mean",
                               "rolling_mean_lo", "rolling_mean_hi", "grad_norm_mean", "n_seeds"});
                for (std::size_t t = 0; t < bret.mean.size(); ++t) {
                    csv.row({fmt(t), fmt(bret.mean[t]), fmt(bret.lower[t]), fmt(bret.upper[t]), fmt(broll.mean[t]),
                             fmt(broll.lower[t]), fmt(broll.upper[t]), fmt(bgrad.mean[t]), fmt(n)});
                }
            }
            plots.curve("rolling_mean_aggregate.txt", "iteration", "rolling_mean", "across-seed mean of the rolling mean return",
                        iota_doubles(broll.mean.size()), broll.mean);
            if (config.kind == ExperimentKind::tail_trace) {
                CsvWriter csv(result.directory / "tail_aggregate.csv",
                              "episode [iteration index], alpha_hat_mean [tail index, mean over seeds without a gap], "
                              "n_valid [count]",
                              {"episode", "alpha_hat_mean", "n_valid"});
                std::vector<double> xs, ys;
                const std::size_t len = train_data[0].trace.size();
                for (std::size_t t = 0; t < len; ++t) {
                    double sum = 0.0;
                    std::size_t valid = 0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const auto& p = train_data[i].trace[t];
                        if (!p.gap) {
                            sum += p.alpha_hat;
                            ++valid;
                        }
                    }
                    const double mean = valid ? sum / static_cast<double>(valid) : std::nan("");
                    csv.row({fmt(t), fmt(mean), fmt(valid)});
                    xs.push_back(static_cast<double>(t));
                    ys.push_back(mean);
                }
                plots.curve("alpha_hat_aggregate.txt", "episode", "alpha_hat", "across-seed mean tail-index trace", xs, ys);
            }
            if (config.kind == ExperimentKind::occupancy) {
                CsvWriter csv(result.directory / "occupancy_aggregate.csv",
                              "bin [index], frequency_mean [fraction of visits, mean over seeds]", {"bin", "frequency_mean"});
                const std::size_t bins = config.occupancy.bins;
                std::vector<double> mean(bins, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t b = 0; b < bins; ++b) mean[b] += train_data[i].occupancy[b] / static_cast<double>(n);
                }
                for (std::size_t b = 0; b < bins; ++b) csv.row({fmt(b), fmt(mean[b])});
                plots.curve("occupancy_aggregate.txt", "bin", "frequency", "mean state-visitation histogram",
                            iota_doubles(bins), mean);
            }
            break;
        }
        case ExperimentKind::exit_time: {
            const auto& m = config.metastability;
            CsvWriter csv(result.directory / "aggregate.csv",
                          "alpha [tail index], slope_mean [fit slope, mean over seeds], slope_lo / slope_hi [95% "
                          "bootstrap interval], r2_mean [1], law [fit model], n_seeds [count with a fit]",
                          {"alpha", "slope_mean", "slope_lo", "slope_hi", "r2_mean", "law", "n_seeds"});
            for (std::size_t a = 0; a < m.alphas.size(); ++a) {
                std::vector<std::vector<double>> slopes;
                double r2 = 0.0;
                std::string law = "unavailable";
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& f = exit_data[i].fits[a];
                    if (f.law == "unavailable") continue;
                    slopes.push_back({f.slope});
                    r2 += f.r2;
                    law = f.law;
                }
                const auto band = bootstrap_band(slopes);
                const bool any = !slopes.empty();
                csv.row({fmt(m.alphas[a]), fmt(any ? band.mean[0] : std::nan("")), fmt(any ? band.lower[0] : std::nan("")),
                         fmt(any ? band.upper[0] : std::nan("")), fmt(any ? r2 / static_cast<double>(slopes.size()) : std::nan("")),
                         law, fmt(slopes.size())});

                // log(1/eps) against log mean exit time, averaged over seeds
                const std::size_t per = std::max<std::size_t>(m.epsilons.size(), 1);
                std::vector<double> xs, ys;
                for (std::size_t k = 0; k < per; ++k) {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < n; ++i) sum += std::log(exit_data[i].cells[a * per + k].mean_exit);
                    xs.push_back(std::log(1.0 / exit_data[0].cells[a * per + k].epsilon));
                    ys.push_back(sum / static_cast<double>(n));
                }
                std::ostringstream name;
                name << "exit_time_alpha_" << m.alphas[a] << ".txt";
                plots.curve(name.str(), "log_inv_epsilon", "log_mean_exit", "mean exit time against noise level", xs, ys);
            }
            break;
        }
        case ExperimentKind::transition: {
            const auto& m = config.metastability;
            CsvWriter csv(result.directory / "aggregate.csv",
                          "alpha [tail index], right_probability_mean [fraction], right_probability_lo / _hi [95% "
                          "bootstrap interval], theoretical_ratio [fraction], censored_fraction_mean [fraction], n_seeds [count]",
                          {"alpha", "right_probability_mean", "right_probability_lo", "right_probability_hi",
                           "theoretical_ratio", "censored_fraction_mean", "n_seeds"});
            std::vector<double> xs, ys;
            for (std::size_t a = 0; a < m.alphas.size(); ++a) {
                std::vector<std::vector<double>> probs;
                double cens = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    probs.push_back({transition_data[i].studies[a].right_probability});
                    cens += transition_data[i].studies[a].censored_fraction;
                }
                const auto band = bootstrap_band(probs);
                csv.row({fmt(m.alphas[a]), fmt(band.mean[0]), fmt(band.lower[0]), fmt(band.upper[0]),
                         fmt(transition_data[0].studies[a].theoretical_ratio), fmt(cens / static_cast<double>(n)), fmt(n)});
                xs.push_back(m.alphas[a]);
                ys.push_back(band.mean[0]);
            }
            plots.curve("right_probability.txt", "alpha", "right_probability", "empirical right-transition probability", xs, ys);
            break;
        }
    }
    plots.write_manifest();

    json meta;
    meta["started_utc"] = iso_time(started);
    meta["finished_utc"] = iso_time(std::chrono::system_clock::now());
    meta["command_line"] = command_line;
    meta["kind"] = to_string(config.kind);
    meta["seeds"] = config.seeds;
    std::ofstream(result.directory / "metadata.json") << meta.dump(2) << "\n";
    return result;
}

CompareMetric compare_metric_from_string(const std::string& name) {
    if (name == "mean_return") return CompareMetric::mean_return;
    if (name == "rolling_mean") return CompareMetric::rolling_mean;
    if (name == "grad_norm") return CompareMetric::grad_norm;
    throw ConfigError("metric", "unknown metric '" + name + "' (expected mean_return, rolling_mean or grad_norm)");
}

std::string to_string(CompareMetric metric) {
    switch (metric) {
        case CompareMetric::mean_return: return "mean_return";
        case CompareMetric::rolling_mean: return "rolling_mean";
        case CompareMetric::grad_norm: return "grad_norm";
    }
    return "unknown";
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("CSV has no column '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::stod(r.at(idx)));
    return out;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

void compare_runs(const std::vector<fs::path>& run_dirs, CompareMetric metric, const fs::path& out_csv) {
    if (run_dirs.empty()) throw ConfigError("runs", "at least one run directory is required");
    std::vector<ExperimentConfig> configs;
    for (const auto& d : run_dirs) {
        auto cfg = load_config((d / "config.json").string());
        if (!trains_policy(cfg.kind)) {
            throw ConfigError("kind", "run '" + d.string() + "' is a " + to_string(cfg.kind) + " experiment without training logs");
        }
        configs.push_back(std::move(cfg));
    }
    const json env0 = serialize_config(configs[0])["env"];
    for (std::size_t i = 1; i < configs.size(); ++i) {
        const json env = serialize_config(configs[i])["env"];
        for (auto it = env0.begin(); it != env0.end(); ++it) {
            if (env.at(it.key()) != it.value()) {
                throw ConfigError("env." + it.key(), "differs between '" + run_dirs[0].string() + "' and '" +
                                                         run_dirs[i].string() + "'");
            }
        }
        if (configs[i].train.episodes != configs[0].train.episodes) {
            throw ConfigError("train.episodes", "differs between '" + run_dirs[0].string() + "' and '" + run_dirs[i].string() + "'");
        }
        if (configs[i].train.eval_window != configs[0].train.eval_window) {
            throw ConfigError("train.eval_window",
                              "differs between '" + run_dirs[0].string() + "' and '" + run_dirs[i].string() + "'");
        }
    }

    std::vector<BootstrapBand> bands;
    for (std::size_t r = 0; r < run_dirs.size(); ++r) {
        std::vector<std::vector<double>> per_seed;
        for (auto seed : configs[r].seeds) {
            per_seed.push_back(read_csv(seed_dir(run_dirs[r], seed) / "train_log.csv").column(to_string(metric)));
        }
        bands.push_back(bootstrap_band(per_seed));
    }

    std::vector<std::string> header{"iteration"};
    for (std::size_t r = 0; r < bands.size(); ++r) {
        const std::string p = "run" + std::to_string(r) + "_";
        header.insert(header.end(), {p + "mean", p + "lo", p + "hi"});
    }
    for (std::size_t r = 1; r < bands.size(); ++r) header.push_back("diff_" + std::to_string(r));
    std::ostringstream units;
    units << "iteration [count]; runK_mean/lo/hi [" << to_string(metric)
          << ", across-seed mean and 95% bootstrap interval]; diff_K [runK_mean - run0_mean]; runs:";
    for (std::size_t r = 0; r < run_dirs.size(); ++r) units << " run" << r << "=" << run_dirs[r].string();
    CsvWriter csv(out_csv, units.str(), header);
    std::size_t len = bands[0].mean.size();
    for (const auto& b : bands) len = std::min(len, b.mean.size());
    for (std::size_t t = 0; t < len; ++t) {
        std::vector<std::string> row{fmt(t)};
        for (const auto& b : bands) row.insert(row.end(), {fmt(b.mean[t]), fmt(b.lower[t]), fmt(b.upper[t])});
        for (std::size_t r = 1; r < bands.size(); ++r) row.push_back(fmt(bands[r].mean[t] - bands[0].mean[t]));
        csv.row(row);
    }
}

}  // namespace hpg
