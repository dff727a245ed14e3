#include "hpg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "hpg/errors.hpp"

namespace hpg {

double Trajectory::undiscounted_return() const {
    double total = 0.0;
    for (const auto& step : steps) total += step.reward;
    return total;
}

std::vector<double> Trajectory::visited_states() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& step : steps) {
        if (!step.absorbing) out.push_back(step.state);
    }
    return out;
}

Trajectory rollout(const Environment& env, const Policy& policy, const PolicyParams& params, double gamma,
                   SeededStream& stream) {
    Trajectory traj;
    traj.stream_id = stream.stream_id();
    std::uint64_t horizon = sample_horizon(gamma, stream);
    const std::uint64_t cap = env.horizon_cap();
    if (horizon >= cap) {
        horizon = cap - 1;
        traj.truncated = true;
    }
    traj.horizon = horizon;
    traj.score_dim = policy.param_dim();
    traj.steps.reserve(horizon + 1);
    traj.scores.assign((horizon + 1) * traj.score_dim, 0.0);

    EnvState state = env.reset(stream);
    for (std::uint64_t t = 0; t <= horizon; ++t) {
        if (state.done) {
            traj.steps.push_back(TrajectoryStep{state.s, 0.0, 0.0, true});
            continue;
        }
        const auto phi = policy.featurize(state.s);
        const double action = policy.sample_action(params, phi, stream);
        const auto score = policy.score(params, phi, action);
        std::copy(score.begin(), score.end(), traj.scores.begin() + static_cast<std::ptrdiff_t>(t * traj.score_dim));
        const StepResult result = env.step(state, action, stream);
        traj.steps.push_back(TrajectoryStep{state.s, action, result.reward, false});
        ++traj.env_steps;
        state = result.next_state;
    }
    return traj;
}

Episode run_episode(const Environment& env, const Policy& policy, const PolicyParams& params, SeededStream& stream) {
    Episode episode;
    EnvState state = env.reset(stream);
    episode.states.push_back(state.s);
    while (!state.done) {
        const auto phi = policy.featurize(state.s);
        const double action = policy.sample_action(params, phi, stream);
        const StepResult result = env.step(state, action, stream);
        episode.total_return += result.reward;
        state = result.next_state;
        episode.states.push_back(state.s);
    }
    return episode;
}

GradientEstimate gpomdp_estimate(const Trajectory& trajectory, const Policy& policy, const PolicyParams& params,
                                 double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("discount gamma must lie in [0, 1)");
    const std::size_t dim = params.dim();
    if (dim != policy.param_dim()) {
        throw DomainError("parameter dimension " + std::to_string(dim) + " does not match the policy's " +
                          std::to_string(policy.param_dim()));
    }
    if (trajectory.steps.size() != trajectory.horizon + 1) {
        throw DomainError("trajectory holds " + std::to_string(trajectory.steps.size()) + " steps for horizon " +
                          std::to_string(trajectory.horizon));
    }
    const bool use_cache =
        trajectory.score_dim == dim && trajectory.scores.size() == trajectory.steps.size() * trajectory.score_dim;

    GradientEstimate out;
    out.g.assign(dim, 0.0);
    out.horizon_used = trajectory.horizon;
    std::vector<double> prefix(dim, 0.0);
    const double root_gamma = std::sqrt(gamma);
    double weight = 1.0;  // gamma^(t/2)
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
        const auto& step = trajectory.steps[t];
        if (!step.absorbing) {
            if (use_cache) {
                const double* row = trajectory.scores.data() + t * dim;
                for (std::size_t i = 0; i < dim; ++i) prefix[i] += row[i];
            } else {
                const auto score = policy.score(params, policy.featurize(step.state), step.action);
                for (std::size_t i = 0; i < dim; ++i) prefix[i] += score[i];
            }
            if (step.reward != 0.0) {
                const double coeff = weight * step.reward;
                for (std::size_t i = 0; i < dim; ++i) out.g[i] += coeff * prefix[i];
            }
        }
        weight *= root_gamma;
    }
    return out;
}

SeededStream StreamSet::stream(std::size_t i) const {
    if (i >= count) throw UsageError("stream index " + std::to_string(i) + " outside a set of " + std::to_string(count));
    return SeededStream(seed, first_stream_id + i);
}

BatchEstimate batch_estimate(const Environment& env, const Policy& policy, const PolicyParams& params, double gamma,
                             std::size_t batch_size, const StreamSet& streams, unsigned workers) {
    if (batch_size == 0) throw DomainError("batch size must be at least 1");
    if (streams.count < batch_size) {
        throw DomainError("stream set provides " + std::to_string(streams.count) + " streams for a batch of " +
                          std::to_string(batch_size));
    }
    std::vector<std::vector<double>> estimates(batch_size);
    std::vector<double> returns(batch_size, 0.0);
    std::vector<std::uint64_t> horizons(batch_size, 0);
    std::vector<char> truncated(batch_size, 0);

    auto work = [&](std::size_t i) {
        SeededStream stream = streams.stream(i);
        const Trajectory traj = rollout(env, policy, params, gamma, stream);
        estimates[i] = gpomdp_estimate(traj, policy, params, gamma).g;
        returns[i] = traj.undiscounted_return();
        horizons[i] = traj.horizon;
        truncated[i] = traj.truncated ? 1 : 0;
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(batch_size)));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < batch_size; ++i) work(i);
    } else {
        std::vector<std::jthread> pool;
        std::vector<std::exception_ptr> errors(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < batch_size; i += n_workers) work(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    BatchEstimate out;
    out.estimate.g.assign(params.dim(), 0.0);
    out.estimate.batch_size = batch_size;
    for (std::size_t i = 0; i < batch_size; ++i) {
        for (std::size_t j = 0; j < out.estimate.g.size(); ++j) out.estimate.g[j] += estimates[i][j];
        out.mean_return += returns[i];
        out.estimate.horizon_used += horizons[i];
        out.truncated += static_cast<std::size_t>(truncated[i]);
    }
    const double inv = 1.0 / static_cast<double>(batch_size);
    for (auto& v : out.estimate.g) v *= inv;
    out.mean_return *= inv;

    for (std::size_t j = 0; j < out.estimate.g.size(); ++j) {
        if (!std::isfinite(out.estimate.g[j])) {
            std::ostringstream msg;
            msg << "non-finite gradient component " << j << " (seed " << streams.seed << ", streams "
                << streams.first_stream_id << ".." << streams.first_stream_id + batch_size - 1 << ")";
            throw NumericalError(msg.str());
        }
    }
    out.per_trajectory = std::move(estimates);
    return out;
}

}  // namespace hpg
