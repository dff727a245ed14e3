/**
 * @file trainer.hpp
 * @brief Heavy-tailed policy gradient outer loop: batch estimate, ascent step,
 *        scale clamp, per-iteration logging and the gradient-norm trend fit.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hpg/environments.hpp"
#include "hpg/estimator.hpp"
#include "hpg/policies.hpp"

namespace hpg {

struct StepSchedule {
    enum class Kind { constant, theorem1, geometric_decay };

    Kind kind = Kind::geometric_decay;
    double eta = 0.005;      ///< constant
    double beta = 1.0;       ///< theorem1: eta = K^(-beta / (beta + 1))
    double eta0 = 0.005;     ///< geometric_decay start
    double eta_min = 5e-9;   ///< geometric_decay end

    static StepSchedule constant(double eta);
    static StepSchedule theorem1(double beta);
    static StepSchedule geometric_decay(double eta0, double eta_min);

    /// Step size for iteration k (0-based) of a K-iteration run.
    /// geometric_decay interpolates eta0 -> eta_min log-linearly over the run.
    double at(std::size_t k, std::size_t total) const;
    void validate() const;
};

std::string to_string(StepSchedule::Kind kind);
StepSchedule::Kind schedule_kind_from_string(const std::string& name);

struct TrainConfig {
    double gamma = 0.97;
    std::size_t episodes = 1000;  ///< K outer iterations
    std::size_t batch = 5;        ///< B_k trajectories per iteration
    StepSchedule schedule{};
    std::uint64_t seed = 0;
    std::size_t eval_window = 100;
    std::optional<double> grad_clip;  ///< off unless set
    unsigned workers = 1;
    bool record_gradients = false;
    std::size_t snapshot_every = 0;  ///< store the pre-update parameters every n iterations (0: never)

    void validate() const;
};

struct TrainRecord {
    std::size_t iteration = 0;
    double mean_return = 0.0;   ///< mean undiscounted return of the batch
    double rolling_mean = 0.0;  ///< mean of mean_return over the trailing eval_window iterations
    double grad_norm = 0.0;     ///< norm of the applied (masked, possibly clipped) gradient
    double eta = 0.0;
    double wallclock_ms = 0.0;
};

struct TrainLog {
    std::vector<TrainRecord> records;
    /// Batch gradient estimate per iteration before clipping (scale entry masked
    /// when the scale is frozen); filled when record_gradients is set.
    std::vector<std::vector<double>> gradients;
    /// (iteration, parameters before that iteration's update); filled when snapshot_every > 0.
    std::vector<std::pair<std::size_t, PolicyParams>> snapshots;
    std::size_t clip_events = 0;
    std::size_t truncated_trajectories = 0;
    std::size_t total_trajectories = 0;

    std::vector<double> grad_norms() const;
    std::vector<double> mean_returns() const;
};

struct TrainResult {
    PolicyParams params;
    TrainLog log;
};

/// Called each iteration with (iteration, batch gradient estimate before clipping).
using GradientHook = std::function<void(std::size_t, std::span<const double>)>;

/// Iteration k draws its batch from streams (seed, k * batch + i).
TrainResult train(const Environment& env, const Policy& policy, PolicyParams initial, const TrainConfig& config,
                  const GradientHook& hook = {});

/// Trailing-window means; the first window - 1 entries average what is available.
std::vector<double> rolling_mean(std::span<const double> values, std::size_t window);

struct TrendFit {
    double slope = 0.0;     ///< d log(running mean ||g||^2) / d log K
    double expected = 0.0;  ///< -beta / (1 + beta)
    std::size_t points = 0;
};

/// Least-squares slope of log((1/K) sum_{k<=K} ||g_k||^2) against log K.
/// A diagnostic only: the estimate norm is a noisy proxy for ||grad J||.
TrendFit gradient_norm_trend(std::span<const double> grad_norms, double beta);
TrendFit gradient_norm_trend(const TrainLog& log, double beta);

}  // namespace hpg
