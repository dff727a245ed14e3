/**
 * @file environments.hpp
 * @brief Scalar-state episodic MDPs: Pathological Mountain Car, 1D Mario and
 *        a one-step quadratic bandit used for gradient checks.
 *
 * Environments are deterministic given (state, clipped action); the stream
 * argument is accepted for interface stability and is not consumed.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpg/stable_random.hpp"

namespace hpg {

struct EnvState {
    double s = 0.0;
    std::size_t step_count = 0;
    bool done = false;
};

struct StepResult {
    EnvState next_state;
    double reward = 0.0;
    bool action_clipped = false;
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual EnvState reset(SeededStream& stream) const = 0;
    virtual StepResult step(const EnvState& state, double action, SeededStream& stream) const = 0;

    /// U_R: every emitted reward satisfies |r| <= reward_bound().
    virtual double reward_bound() const = 0;
    virtual double state_lower() const = 0;
    virtual double state_upper() const = 0;
    virtual double action_limit() const = 0;
    virtual std::size_t horizon_cap() const = 0;

    virtual std::unique_ptr<Environment> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Pathological Mountain Car
//
// State s in [-4.0, 3.709], action = speed clipped to [-20, 20],
// s' = clamp(s + dt * a). Reward on the post-step state:
//   500 - a^2  inside the left goal band   |s' + 4.0|   <= goal_tolerance
//    10 - a^2  inside the local goal band  |s' - 2.667| <= goal_tolerance
//       - a^2  everywhere else
// Entering a band ends the episode; so does reaching horizon_cap steps.

struct PmcConfig {
    double dt = 0.05;
    double goal_tolerance = 0.05;
    std::size_t horizon_cap = 500;
    double init = 2.26;
    double action_limit = 20.0;
};

class PathologicalMountainCar final : public Environment {
public:
    static constexpr double kLower = -4.0;
    static constexpr double kUpper = 3.709;
    static constexpr double kLocalGoal = 2.667;
    static constexpr double kGoalReward = 500.0;
    static constexpr double kLocalReward = 10.0;

    explicit PathologicalMountainCar(PmcConfig config = {});

    const PmcConfig& config() const { return config_; }

    std::string name() const override { return "pmc"; }
    EnvState reset(SeededStream& stream) const override;
    StepResult step(const EnvState& state, double action, SeededStream& stream) const override;
    double reward_bound() const override { return kGoalReward; }
    double state_lower() const override { return kLower; }
    double state_upper() const override { return kUpper; }
    double action_limit() const override { return config_.action_limit; }
    std::size_t horizon_cap() const override { return config_.horizon_cap; }
    std::unique_ptr<Environment> clone() const override;

    bool in_goal_band(double s) const;
    bool in_local_band(double s) const;

private:
    PmcConfig config_;
};

/// Resets at `init` (defaults to the configured start, 2.26). Throws outside the state box.
EnvState pmc_reset(const PathologicalMountainCar& env, std::optional<double> init, SeededStream& stream);
StepResult pmc_step(const PathologicalMountainCar& env, const EnvState& state, double action, SeededStream& stream);

// ---------------------------------------------------------------------------
// 1D Mario
//
// s in [0, 1], a clipped to [-0.1, 0.1], r = 1{s + a < 0}, s' = min(1, max(0, s + a)).
// Episodes start at 0 and end only at the horizon cap.

struct MarioConfig {
    std::size_t horizon_cap = 500;
    double action_limit = 0.1;
};

class Mario1D final : public Environment {
public:
    explicit Mario1D(MarioConfig config = {});

    std::string name() const override { return "mario"; }
    EnvState reset(SeededStream& stream) const override;
    StepResult step(const EnvState& state, double action, SeededStream& stream) const override;
    double reward_bound() const override { return 1.0; }
    double state_lower() const override { return 0.0; }
    double state_upper() const override { return 1.0; }
    double action_limit() const override { return config_.action_limit; }
    std::size_t horizon_cap() const override { return config_.horizon_cap; }
    std::unique_ptr<Environment> clone() const override;

private:
    MarioConfig config_;
};

EnvState mario_reset(const Mario1D& env, SeededStream& stream);
StepResult mario_step(const Mario1D& env, const EnvState& state, double action, SeededStream& stream);

// ---------------------------------------------------------------------------
// One-step bandit: fixed state, single action, reward -(a - target)^2.
// No action clipping; |r| is bounded only through reward_bound(), used by checks.

class QuadraticBandit final : public Environment {
public:
    QuadraticBandit(double state, double target, double reward_cap = 1e12);

    double target() const { return target_; }

    std::string name() const override { return "bandit"; }
    EnvState reset(SeededStream& stream) const override;
    StepResult step(const EnvState& state, double action, SeededStream& stream) const override;
    double reward_bound() const override { return reward_cap_; }
    double state_lower() const override { return state_; }
    double state_upper() const override { return state_; }
    double action_limit() const override;
    std::size_t horizon_cap() const override { return 1; }
    std::unique_ptr<Environment> clone() const override;

private:
    double state_;
    double target_;
    double reward_cap_;
};

// ---------------------------------------------------------------------------

/// Normalised state-visitation histogram over [lo, hi] with `bins` equal bins
/// (the upper edge belongs to the last bin). Entries sum to 1.
std::vector<double> occupancy_histogram(std::span<const std::vector<double>> state_sequences, std::size_t bins,
                                        double lo, double hi);

}  // namespace hpg
