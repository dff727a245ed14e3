/**
 * @file stable_random.hpp
 * @brief Seeded random sources: symmetric alpha-stable variates, Gaussian
 *        variates and the geometric rollout-horizon sampler.
 *
 * Scale convention. A symmetric alpha-stable variable X ~ SaS(sigma) here has
 * characteristic function
 *
 *     E[exp(i w X)] = exp(-sigma |w|^alpha).
 *
 * The Chambers-Mallows-Stuck (CMS) construction yields a unit variable Z with
 * E[exp(i w Z)] = exp(-|w|^alpha). Since E[exp(i w c Z)] = exp(-c^alpha |w|^alpha),
 * the draw is rescaled by c = sigma^(1/alpha). With this convention alpha = 2
 * gives a zero-mean Gaussian with variance 2 sigma and alpha = 1 a Cauchy
 * with scale (half-width at half-maximum) sigma.
 *
 * Streams are counter based (Philox4x32-10): a stream is the pair
 * (seed, stream_id), the seed is the cipher key and stream_id occupies the
 * upper half of the 128-bit counter. Two streams never share state, so a
 * worker can own its stream without synchronisation.
 */
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace hpg {

/// Philox4x32 with 10 rounds. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    Philox4x32(key_type key, counter_type counter) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xFFFFFFFFu; }

    result_type operator()();

    /// Applies the 10-round bijection to one counter block.
    static counter_type block(counter_type counter, key_type key);

private:
    void increment();

    key_type key_;
    counter_type counter_;
    counter_type buffer_{};
    int buffered_ = 0;
};

class SeededStream {
public:
    SeededStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint32_t next_u32() { return engine_(); }
    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal via the Box-Muller transform (second variate cached).
    double normal();
    /// Exponential with unit mean.
    double exponential();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    Philox4x32 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

struct StableSpec {
    double alpha = 2.0;
    double sigma = 1.0;

    /// Throws DomainError unless 0 < alpha <= 2 and sigma > 0.
    void validate() const;
};

double sample_stable(const StableSpec& spec, SeededStream& stream);

/// Componentwise independent SaS draws sharing one tail index.
std::vector<double> sample_stable_vector(const StableSpec& spec, std::size_t dim, SeededStream& stream);

/// T with P[T >= t] = gamma^(t/2), i.e. Geom(1 - sqrt(gamma)) on {0, 1, ...}.
/// Drawn by inverting the survival function, O(1) for any gamma.
std::uint64_t sample_horizon(double gamma, SeededStream& stream);

/// E[T] = sqrt(gamma) / (1 - sqrt(gamma)).
double expected_horizon(double gamma);

}  // namespace hpg
