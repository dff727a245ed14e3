/**
 * @file estimator.hpp
 * @brief Random-horizon rollouts and the discounted GPOMDP-style gradient estimate
 *
 *     g = sum_{t=0}^{T} gamma^(t/2) R(s_t, a_t) sum_{tau=0}^{t} grad log pi(a_tau | s_tau),
 *
 * with T ~ Geom(1 - gamma^(1/2)) drawn independently of the environment, so
 * that P[T >= t] gamma^(t/2) = gamma^t and E[g] is the gradient of the
 * discounted value. No baseline or other variance reduction is applied.
 *
 * If the environment terminates before step T the trajectory is padded with
 * absorbing zero-reward steps; their scores never multiply a non-zero reward,
 * so the padding leaves the estimate unchanged. If T would exceed the
 * environment's horizon cap it is truncated to cap - 1 and the trajectory is
 * flagged.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hpg/environments.hpp"
#include "hpg/policies.hpp"
#include "hpg/stable_random.hpp"

namespace hpg {

struct TrajectoryStep {
    double state = 0.0;
    double action = 0.0;  ///< unclipped draw from the policy
    double reward = 0.0;
    bool absorbing = false;
};

struct Trajectory {
    std::uint64_t horizon = 0;  ///< T; steps.size() == T + 1
    std::vector<TrajectoryStep> steps;
    /// Row-major (T + 1) x score_dim score cache filled during the rollout;
    /// rows of absorbing steps are zero.
    std::vector<double> scores;
    std::size_t score_dim = 0;
    std::uint64_t stream_id = 0;
    bool truncated = false;     ///< sampled horizon exceeded the environment cap
    std::size_t env_steps = 0;  ///< non-absorbing steps

    double undiscounted_return() const;
    std::vector<double> visited_states() const;
};

struct GradientEstimate {
    std::vector<double> g;
    std::uint64_t horizon_used = 0;  ///< summed over the batch
    std::size_t batch_size = 1;
};

/// Samples T via sample_horizon, then takes T + 1 steps under the policy.
Trajectory rollout(const Environment& env, const Policy& policy, const PolicyParams& params, double gamma,
                   SeededStream& stream);

/// Runs one full episode (until the environment reports done) and returns the
/// visited states, starting with the reset state. Used for evaluation and occupancy.
struct Episode {
    std::vector<double> states;
    double total_return = 0.0;
};
Episode run_episode(const Environment& env, const Policy& policy, const PolicyParams& params, SeededStream& stream);

/// Single-trajectory estimate. Uses the rollout's score cache when it has the
/// right width, otherwise recomputes scores from the stored states and actions.
GradientEstimate gpomdp_estimate(const Trajectory& trajectory, const Policy& policy, const PolicyParams& params,
                                 double gamma);

/// Ordered family of streams (seed, first_stream_id + i), i < count.
struct StreamSet {
    std::uint64_t seed = 0;
    std::uint64_t first_stream_id = 0;
    std::size_t count = 0;

    SeededStream stream(std::size_t i) const;
};

struct BatchEstimate {
    GradientEstimate estimate;
    double mean_return = 0.0;  ///< mean undiscounted return of the batch's trajectories
    std::size_t truncated = 0;
    std::vector<std::vector<double>> per_trajectory;
};

/// Mean of `batch_size` independent single-trajectory estimates, trajectory i
/// using streams.stream(i). The reduction runs in index order, so the result
/// does not depend on `workers`.
BatchEstimate batch_estimate(const Environment& env, const Policy& policy, const PolicyParams& params, double gamma,
                             std::size_t batch_size, const StreamSet& streams, unsigned workers = 1);

}  // namespace hpg
