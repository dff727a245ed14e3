#include "hpg/tail_index.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "hpg/errors.hpp"

namespace hpg {

namespace {

struct SplitLog {
    double mantissa_log = 0.0;
    std::int64_t exponent = 0;
};

// log|v| = log(m) + e log 2 with |v| = m 2^e, m in [0.5, 1)
SplitLog split_log(double v) {
    int e = 0;
    const double m = std::frexp(std::abs(v), &e);
    return SplitLog{std::log(m), e};
}

constexpr std::size_t kMinTraceSamples = 4;

}  // namespace

TailIndexEstimate estimate_alpha(std::span<const double> samples, std::size_t k1, std::size_t k2) {
    if (k1 < 2) throw DomainError("tail index: block length K1 must be at least 2");
    if (k2 < 1) throw DomainError("tail index: block count K2 must be at least 1");
    const std::size_t k = k1 * k2;

    TailIndexEstimate out;
    out.k1 = k1;
    out.k2 = k2;
    out.n_samples = samples.size();

    std::vector<double> used;
    used.reserve(k);
    for (double v : samples) {
        if (!std::isfinite(v)) throw DomainError("tail index: non-finite sample");
        if (v == 0.0) {
            ++out.zeros_dropped;
            continue;
        }
        if (used.size() < k) used.push_back(v);
    }
    if (used.size() < k) {
        throw DomainError("tail index: need " + std::to_string(k) + " non-zero samples, have " +
                          std::to_string(used.size()));
    }
    out.unreliable = samples.empty() ||
                     static_cast<double>(out.zeros_dropped) > 0.01 * static_cast<double>(samples.size());

    double x_mant = 0.0;
    std::int64_t x_exp = 0;
    for (double v : used) {
        const auto s = split_log(v);
        x_mant += s.mantissa_log;
        x_exp += s.exponent;
    }
    double y_mant = 0.0;
    std::int64_t y_exp = 0;
    for (std::size_t j = 0; j < k2; ++j) {
        double block = 0.0;
        for (std::size_t i = 0; i < k1; ++i) block += used[j * k1 + i];
        if (block == 0.0) block = std::numeric_limits<double>::denorm_min();
        const auto s = split_log(block);
        y_mant += s.mantissa_log;
        y_exp += s.exponent;
    }
    const double kd = static_cast<double>(k);
    const double exponent_part =
        static_cast<double>(static_cast<std::int64_t>(k1) * y_exp - x_exp) / kd * std::numbers::ln2;
    const double mean_diff = y_mant / static_cast<double>(k2) - x_mant / kd + exponent_part;
    out.inverse_alpha = mean_diff / std::log(static_cast<double>(k1));

    if (out.inverse_alpha <= 0.5) {
        out.alpha_hat = 2.0;
        out.clamped = out.inverse_alpha < 0.5;
    } else {
        out.alpha_hat = 1.0 / out.inverse_alpha;
    }
    return out;
}

TailIndexEstimate estimate_alpha(std::span<const double> samples) {
    std::size_t nonzero = 0;
    for (double v : samples) nonzero += (v != 0.0);
    const auto side = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(nonzero))));
    if (side < 2) throw DomainError("tail index: need at least 4 non-zero samples");
    return estimate_alpha(samples, side, side);
}

std::vector<TailTracePoint> gradient_tail_trace(std::span<const std::vector<double>> gradients, std::size_t window) {
    GradientTailTracer tracer(window);
    for (std::size_t k = 0; k < gradients.size(); ++k) tracer(k, gradients[k]);
    return tracer.trace();
}

void GradientTailTracer::operator()(std::size_t episode, std::span<const double> gradient) {
    if (window_ == 0) throw DomainError("tail trace window must be at least 1");
    recent_.emplace_back(gradient.begin(), gradient.end());
    if (recent_.size() > window_) recent_.erase(recent_.begin());

    std::vector<double> flat;
    for (const auto& g : recent_) {
        for (double v : g) {
            if (v != 0.0) flat.push_back(v);
        }
    }
    TailTracePoint point;
    point.episode = episode;
    point.n_samples = flat.size();
    if (flat.size() < kMinTraceSamples) {
        point.gap = true;
        point.alpha_hat = std::numeric_limits<double>::quiet_NaN();
    } else {
        point.alpha_hat = estimate_alpha(flat).alpha_hat;
    }
    trace_.push_back(point);
}

}  // namespace hpg
