#include "hpg/stable_random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hpg/errors.hpp"

namespace hpg {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::counter_type Philox4x32::block(counter_type c, key_type k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
    }
    return c;
}

void Philox4x32::increment() {
    // low 64 bits of the counter are the block index; the high half is the stream id
    if (++counter_[0] == 0) ++counter_[1];
}

Philox4x32::result_type Philox4x32::operator()() {
    if (buffered_ == 0) {
        buffer_ = block(counter_, key_);
        increment();
        buffered_ = 4;
    }
    return buffer_[4 - buffered_--];
}

SeededStream::SeededStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_({static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
              {0u, 0u, static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)}) {}

std::uint64_t SeededStream::next_u64() {
    const std::uint64_t hi = engine_();
    const std::uint64_t lo = engine_();
    return (hi << 32) | lo;
}

double SeededStream::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1
    const std::uint64_t k = next_u64() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double SeededStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

double SeededStream::exponential() { return -std::log(uniform()); }

void StableSpec::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw DomainError("stable tail index alpha must lie in (0, 2], got " + std::to_string(alpha));
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("stable scale sigma must be positive and finite, got " + std::to_string(sigma));
    }
}

namespace {

// Unit symmetric CMS draw, characteristic function exp(-|w|^alpha).
double unit_symmetric_stable(double alpha, SeededStream& stream) {
    const double v = std::numbers::pi * (stream.uniform() - 0.5);
    if (alpha == 1.0) return std::tan(v);
    const double w = stream.exponential();
    if (alpha == 2.0) return 2.0 * std::sqrt(w) * std::sin(v);
    const double cos_v = std::cos(v);
    const double lead = std::sin(alpha * v) / std::pow(cos_v, 1.0 / alpha);
    const double tail = std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
    return lead * tail;
}

}  // namespace

double sample_stable(const StableSpec& spec, SeededStream& stream) {
    spec.validate();
    const double scale = std::pow(spec.sigma, 1.0 / spec.alpha);
    return scale * unit_symmetric_stable(spec.alpha, stream);
}

std::vector<double> sample_stable_vector(const StableSpec& spec, std::size_t dim, SeededStream& stream) {
    spec.validate();
    if (dim == 0) throw DomainError("stable vector dimension must be at least 1");
    std::vector<double> out(dim);
    for (auto& v : out) v = sample_stable(spec, stream);
    return out;
}

std::uint64_t sample_horizon(double gamma, SeededStream& stream) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw DomainError("discount gamma must lie in [0, 1), got " + std::to_string(gamma));
    }
    const double u = stream.uniform();
    if (gamma == 0.0) return 0;
    // P[T >= t] = q^t with q = sqrt(gamma); T = floor(log u / log q)
    const double t = std::floor(std::log(u) / (0.5 * std::log(gamma)));
    if (t >= static_cast<double>(std::numeric_limits<std::uint64_t>::max())) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(t);
}

double expected_horizon(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw DomainError("discount gamma must lie in [0, 1), got " + std::to_string(gamma));
    }
    const double q = std::sqrt(gamma);
    return q / (1.0 - q);
}

}  // namespace hpg
