/**
 * @file tail_index.hpp
 * @brief Block-sum tail-index estimator for symmetric alpha-stable samples.
 *
 * With K = K1 * K2 samples X_i and block sums Y_j of K1 consecutive samples,
 *
 *     1/alpha ~ ( mean_j log|Y_j| - mean_i log|X_i| ) / log K1,
 *
 * which converges to 1/alpha almost surely as K2 grows, because a sum of K1
 * iid SaS variables is distributed as K1^(1/alpha) times one of them.
 *
 * Logarithms are split into mantissa and binary exponent and the exponent
 * sums are kept in integers, so multiplying the input by a power of two
 * leaves the estimate bit-for-bit unchanged.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hpg {

struct TailIndexEstimate {
    double alpha_hat = 0.0;      ///< clamped to (0, 2]
    double inverse_alpha = 0.0;  ///< raw estimate of 1/alpha before clamping
    std::size_t k1 = 0;
    std::size_t k2 = 0;
    std::size_t n_samples = 0;     ///< samples supplied
    std::size_t zeros_dropped = 0;
    bool clamped = false;
    bool unreliable = false;  ///< more than 1% of the samples were exact zeros
};

/// Uses the first k1 * k2 non-zero samples. Throws DomainError when k1 < 2,
/// k2 < 1 or fewer than k1 * k2 non-zero samples are available.
TailIndexEstimate estimate_alpha(std::span<const double> samples, std::size_t k1, std::size_t k2);

/// Balanced layout k1 = k2 = floor(sqrt(n)) over the non-zero samples.
TailIndexEstimate estimate_alpha(std::span<const double> samples);

struct TailTracePoint {
    std::size_t episode = 0;
    double alpha_hat = 0.0;  ///< NaN marks a gap
    std::size_t n_samples = 0;
    bool gap = false;
};

/// Per-episode estimate over the flattened gradient coordinates of the
/// trailing `window` episodes (fewer at the start of the run). Windows with
/// fewer than four non-zero coordinates become gap markers.
std::vector<TailTracePoint> gradient_tail_trace(std::span<const std::vector<double>> gradients, std::size_t window = 50);

/// Streaming form of gradient_tail_trace, usable as a trainer gradient hook.
class GradientTailTracer {
public:
    explicit GradientTailTracer(std::size_t window = 50) : window_(window) {}

    void operator()(std::size_t episode, std::span<const double> gradient);
    const std::vector<TailTracePoint>& trace() const { return trace_; }

private:
    std::size_t window_;
    std::vector<std::vector<double>> recent_;
    std::vector<TailTracePoint> trace_;
};

}  // namespace hpg
