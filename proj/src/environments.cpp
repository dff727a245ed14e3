#include "hpg/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpg/errors.hpp"

namespace hpg {

namespace {

// Tolerance bands absorb representation error in s + dt * a (e.g. 2.667 + 0.05).
constexpr double kBandSlack = 1e-9;

void check_action(double action) {
    if (!std::isfinite(action)) throw DomainError("non-finite action");
}

}  // namespace

// ---------------------------------------------------------------------------

PathologicalMountainCar::PathologicalMountainCar(PmcConfig config) : config_(config) {
    if (!(config_.dt > 0.0)) throw DomainError("pmc: dt must be positive");
    if (!(config_.goal_tolerance >= 0.0)) throw DomainError("pmc: goal tolerance must be non-negative");
    if (config_.horizon_cap == 0) throw DomainError("pmc: horizon cap must be positive");
    if (!(config_.action_limit > 0.0)) throw DomainError("pmc: action limit must be positive");
    if (!(config_.init >= kLower && config_.init <= kUpper)) {
        throw DomainError("pmc: initial state " + std::to_string(config_.init) + " outside [-4.0, 3.709]");
    }
}

bool PathologicalMountainCar::in_goal_band(double s) const {
    return std::abs(s - kLower) <= config_.goal_tolerance + kBandSlack;
}

bool PathologicalMountainCar::in_local_band(double s) const {
    return std::abs(s - kLocalGoal) <= config_.goal_tolerance + kBandSlack;
}

EnvState PathologicalMountainCar::reset(SeededStream& stream) const { return pmc_reset(*this, std::nullopt, stream); }

StepResult PathologicalMountainCar::step(const EnvState& state, double action, SeededStream& stream) const {
    return pmc_step(*this, state, action, stream);
}

std::unique_ptr<Environment> PathologicalMountainCar::clone() const {
    return std::make_unique<PathologicalMountainCar>(*this);
}

EnvState pmc_reset(const PathologicalMountainCar& env, std::optional<double> init, SeededStream&) {
    const double s = init.value_or(env.config().init);
    if (!(s >= PathologicalMountainCar::kLower && s <= PathologicalMountainCar::kUpper)) {
        throw DomainError("pmc: initial state " + std::to_string(s) + " outside [-4.0, 3.709]");
    }
    return EnvState{s, 0, false};
}

StepResult pmc_step(const PathologicalMountainCar& env, const EnvState& state, double action, SeededStream&) {
    if (state.done) throw UsageError("pmc: step called on a finished episode");
    check_action(action);
    const auto& cfg = env.config();
    const double a = std::clamp(action, -cfg.action_limit, cfg.action_limit);
    const double s_next =
        std::clamp(state.s + cfg.dt * a, PathologicalMountainCar::kLower, PathologicalMountainCar::kUpper);

    StepResult result;
    result.action_clipped = (a != action);
    result.next_state.s = s_next;
    result.next_state.step_count = state.step_count + 1;

    const double energy = a * a;
    bool goal = false;
    if (env.in_goal_band(s_next)) {
        result.reward = PathologicalMountainCar::kGoalReward - energy;
        goal = true;
    } else if (env.in_local_band(s_next)) {
        result.reward = PathologicalMountainCar::kLocalReward - energy;
        goal = true;
    } else {
        result.reward = -energy;
    }
    result.next_state.done = goal || result.next_state.step_count >= cfg.horizon_cap;
    return result;
}

// ---------------------------------------------------------------------------

Mario1D::Mario1D(MarioConfig config) : config_(config) {
    if (config_.horizon_cap == 0) throw DomainError("mario: horizon cap must be positive");
    if (!(config_.action_limit > 0.0)) throw DomainError("mario: action limit must be positive");
}

EnvState Mario1D::reset(SeededStream& stream) const { return mario_reset(*this, stream); }

StepResult Mario1D::step(const EnvState& state, double action, SeededStream& stream) const {
    return mario_step(*this, state, action, stream);
}

std::unique_ptr<Environment> Mario1D::clone() const { return std::make_unique<Mario1D>(*this); }

EnvState mario_reset(const Mario1D&, SeededStream&) { return EnvState{0.0, 0, false}; }

StepResult mario_step(const Mario1D& env, const EnvState& state, double action, SeededStream&) {
    if (state.done) throw UsageError("mario: step called on a finished episode");
    check_action(action);
    const double limit = env.action_limit();
    const double a = std::clamp(action, -limit, limit);
    const double raw = state.s + a;

    StepResult result;
    result.action_clipped = (a != action);
    result.reward = raw < 0.0 ? 1.0 : 0.0;
    result.next_state.s = std::min(1.0, std::max(0.0, raw));
    result.next_state.step_count = state.step_count + 1;
    result.next_state.done = result.next_state.step_count >= env.horizon_cap();
    return result;
}

// ---------------------------------------------------------------------------

QuadraticBandit::QuadraticBandit(double state, double target, double reward_cap)
    : state_(state), target_(target), reward_cap_(reward_cap) {
    if (!std::isfinite(state) || !std::isfinite(target)) throw DomainError("bandit: non-finite state or target");
    if (!(reward_cap > 0.0)) throw DomainError("bandit: reward cap must be positive");
}

EnvState QuadraticBandit::reset(SeededStream&) const { return EnvState{state_, 0, false}; }

StepResult QuadraticBandit::step(const EnvState& state, double action, SeededStream&) const {
    if (state.done) throw UsageError("bandit: step called on a finished episode");
    check_action(action);
    const double d = action - target_;
    StepResult result;
    result.reward = std::max(-reward_cap_, -d * d);
    result.next_state = EnvState{state_, state.step_count + 1, true};
    return result;
}

double QuadraticBandit::action_limit() const { return std::numeric_limits<double>::infinity(); }

std::unique_ptr<Environment> QuadraticBandit::clone() const { return std::make_unique<QuadraticBandit>(*this); }

// ---------------------------------------------------------------------------

std::vector<double> occupancy_histogram(std::span<const std::vector<double>> state_sequences, std::size_t bins,
                                        double lo, double hi) {
    if (bins == 0) throw DomainError("occupancy histogram needs at least one bin");
    if (!(lo < hi)) throw DomainError("occupancy histogram needs lo < hi");
    std::vector<double> counts(bins, 0.0);
    std::size_t total = 0;
    const double width = (hi - lo) / static_cast<double>(bins);
    for (const auto& seq : state_sequences) {
        for (double s : seq) {
            if (!(s >= lo && s <= hi)) throw DomainError("occupancy histogram: state outside [lo, hi]");
            auto bin = static_cast<std::size_t>((s - lo) / width);
            counts[std::min(bin, bins - 1)] += 1.0;
            ++total;
        }
    }
    if (total == 0) throw DomainError("occupancy histogram needs at least one visited state");
    for (auto& c : counts) c /= static_cast<double>(total);
    return counts;
}

}  // namespace hpg
