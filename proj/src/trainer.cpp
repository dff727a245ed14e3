#include "hpg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "hpg/errors.hpp"

namespace hpg {

namespace {
// after the first clip event, only every n-th one is logged
constexpr std::size_t kClipLogEvery = 100;
}  // namespace

StepSchedule StepSchedule::constant(double eta) {
    StepSchedule s;
    s.kind = Kind::constant;
    s.eta = eta;
    return s;
}

StepSchedule StepSchedule::theorem1(double beta) {
    StepSchedule s;
    s.kind = Kind::theorem1;
    s.beta = beta;
    return s;
}

StepSchedule StepSchedule::geometric_decay(double eta0, double eta_min) {
    StepSchedule s;
    s.kind = Kind::geometric_decay;
    s.eta0 = eta0;
    s.eta_min = eta_min;
    return s;
}

void StepSchedule::validate() const {
    switch (kind) {
        case Kind::constant:
            if (!(eta > 0.0)) throw DomainError("schedule.eta must be positive");
            break;
        case Kind::theorem1:
            if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("schedule.beta must lie in (0, 1]");
            break;
        case Kind::geometric_decay:
            if (!(eta0 > 0.0 && eta_min > 0.0 && eta_min <= eta0)) {
                throw DomainError("schedule needs 0 < eta_min <= eta0");
            }
            break;
    }
}

double StepSchedule::at(std::size_t k, std::size_t total) const {
    switch (kind) {
        case Kind::constant: return eta;
        case Kind::theorem1: return std::pow(static_cast<double>(std::max<std::size_t>(total, 1)), -beta / (beta + 1.0));
        case Kind::geometric_decay: {
            if (total <= 1) return eta0;
            const double frac = static_cast<double>(std::min(k, total - 1)) / static_cast<double>(total - 1);
            return std::max(eta_min, eta0 * std::pow(eta_min / eta0, frac));
        }
    }
    return eta;
}

std::string to_string(StepSchedule::Kind kind) {
    switch (kind) {
        case StepSchedule::Kind::constant: return "constant";
        case StepSchedule::Kind::theorem1: return "theorem1";
        case StepSchedule::Kind::geometric_decay: return "geometric_decay";
    }
    return "unknown";
}

StepSchedule::Kind schedule_kind_from_string(const std::string& name) {
    if (name == "constant") return StepSchedule::Kind::constant;
    if (name == "theorem1") return StepSchedule::Kind::theorem1;
    if (name == "geometric_decay") return StepSchedule::Kind::geometric_decay;
    throw DomainError("unknown step-size schedule '" + name + "' (expected constant, theorem1 or geometric_decay)");
}

void TrainConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("train.gamma must lie in [0, 1)");
    if (batch == 0) throw DomainError("train.batch must be at least 1");
    if (eval_window == 0) throw DomainError("train.eval_window must be at least 1");
    if (grad_clip && !(*grad_clip > 0.0)) throw DomainError("train.grad_clip must be positive when set");
    schedule.validate();
}

std::vector<double> TrainLog::grad_norms() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.grad_norm);
    return out;
}

std::vector<double> TrainLog::mean_returns() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.mean_return);
    return out;
}

std::vector<double> rolling_mean(std::span<const double> values, std::size_t window) {
    if (window == 0) throw DomainError("rolling window must be at least 1");
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        if (i >= window) sum -= values[i - window];
        const std::size_t n = std::min(i + 1, window);
        out[i] = sum / static_cast<double>(n);
    }
    return out;
}

TrainResult train(const Environment& env, const Policy& policy, PolicyParams initial, const TrainConfig& config,
                  const GradientHook& hook) {
    config.validate();
    if (initial.dim() != policy.param_dim()) {
        throw DomainError("initial parameters have dimension " + std::to_string(initial.dim()) +
                          ", policy expects " + std::to_string(policy.param_dim()));
    }
    TrainResult result{std::move(initial), {}};
    auto& params = result.params;
    params.clamp_scale(policy.delta0());
    auto& log = result.log;
    log.records.reserve(config.episodes);

    const auto start = std::chrono::steady_clock::now();
    double window_sum = 0.0;
    std::vector<double> returns;
    returns.reserve(config.episodes);

    for (std::size_t k = 0; k < config.episodes; ++k) {
        const StreamSet streams{config.seed, static_cast<std::uint64_t>(k) * config.batch, config.batch};
        BatchEstimate batch;
        try {
            batch = batch_estimate(env, policy, params, config.gamma, config.batch, streams, config.workers);
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "training aborted at iteration " << k << ": " << e.what() << "; params x=[";
            for (std::size_t i = 0; i < params.x.size(); ++i) msg << (i ? ", " : "") << params.x[i];
            msg << "] y=" << params.y;
            throw NumericalError(msg.str());
        }
        if (config.snapshot_every > 0 && k % config.snapshot_every == 0) log.snapshots.emplace_back(k, params);
        std::vector<double> g = std::move(batch.estimate.g);
        if (!policy.kind().variable_scale) g.back() = 0.0;

        if (config.record_gradients) log.gradients.push_back(g);
        if (hook) hook(k, g);

        double norm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
        if (config.grad_clip && norm > *config.grad_clip) {
            const double factor = *config.grad_clip / norm;
            for (auto& v : g) v *= factor;
            if (log.clip_events % kClipLogEvery == 0) {
                std::cerr << "[hpg] gradient clipped at iteration " << k << ": norm " << norm << " > "
                          << *config.grad_clip << " (clip event " << log.clip_events + 1 << ")\n";
            }
            norm = *config.grad_clip;
            ++log.clip_events;
        }

        const double eta = config.schedule.at(k, config.episodes);
        for (std::size_t i = 0; i < params.x.size(); ++i) params.x[i] += eta * g[i];
        params.y += eta * g.back();
        params.clamp_scale(policy.delta0());

        returns.push_back(batch.mean_return);
        window_sum += batch.mean_return;
        if (returns.size() > config.eval_window) window_sum -= returns[returns.size() - 1 - config.eval_window];
        const std::size_t n_window = std::min(returns.size(), config.eval_window);

        TrainRecord rec;
        rec.iteration = k;
        rec.mean_return = batch.mean_return;
        rec.rolling_mean = window_sum / static_cast<double>(n_window);
        rec.grad_norm = norm;
        rec.eta = eta;
        rec.wallclock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        log.records.push_back(rec);
        log.truncated_trajectories += batch.truncated;
        log.total_trajectories += config.batch;
    }
    if (log.clip_events > 0) {
        std::cerr << "[hpg] gradient clipping was active in " << log.clip_events << " of " << config.episodes
                  << " iterations (seed " << config.seed << ")\n";
    }
    return result;
}

TrendFit gradient_norm_trend(std::span<const double> grad_norms, double beta) {
    if (grad_norms.size() < 100) {
        throw DomainError("gradient norm trend needs at least 100 iterations, got " + std::to_string(grad_norms.size()));
    }
    if (!(beta > 0.0)) throw DomainError("gradient norm trend needs beta > 0");
    std::vector<double> xs, ys;
    xs.reserve(grad_norms.size());
    ys.reserve(grad_norms.size());
    double running = 0.0;
    for (std::size_t k = 0; k < grad_norms.size(); ++k) {
        if (!std::isfinite(grad_norms[k])) throw DomainError("gradient norm trend: non-finite norm");
        running += grad_norms[k] * grad_norms[k];
        const double avg = running / static_cast<double>(k + 1);
        if (avg > 0.0) {
            xs.push_back(std::log(static_cast<double>(k + 1)));
            ys.push_back(std::log(avg));
        }
    }
    if (xs.size() < 2) throw DomainError("gradient norm trend: degenerate series (all norms zero)");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return TrendFit{sxy / sxx, -beta / (1.0 + beta), xs.size()};
}

TrendFit gradient_norm_trend(const TrainLog& log, double beta) { return gradient_norm_trend(log.grad_norms(), beta); }

}  // namespace hpg
