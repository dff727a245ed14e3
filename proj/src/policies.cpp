#include "hpg/policies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "hpg/errors.hpp"

namespace hpg {

std::string to_string(Family family) {
    switch (family) {
        case Family::gaussian: return "gaussian";
        case Family::exp_power: return "exp_power";
        case Family::cauchy: return "cauchy";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "exp_power") return Family::exp_power;
    if (name == "cauchy") return Family::cauchy;
    throw DomainError("unknown policy family '" + name + "' (expected gaussian, exp_power or cauchy)");
}

void PolicyKind::validate() const {
    if (family == Family::exp_power && !(alpha >= 1.0 && alpha <= 2.0)) {
        throw DomainError("exp_power tail index must lie in [1, 2], got " + std::to_string(alpha));
    }
}

// ---------------------------------------------------------------------------
// Feature maps

FeatureMap FeatureMap::identity() { return FeatureMap{}; }

FeatureMap FeatureMap::polynomial(int degree) {
    if (degree < 0) throw DomainError("polynomial feature degree must be >= 0");
    FeatureMap map;
    map.kind_ = Kind::polynomial;
    map.degree_ = degree;
    return map;
}

FeatureMap FeatureMap::radial_basis(std::vector<double> centers, double width) {
    if (centers.empty()) throw DomainError("radial-basis feature map needs at least one center");
    if (!(width > 0.0)) throw DomainError("radial-basis width must be positive");
    FeatureMap map;
    map.kind_ = Kind::radial_basis;
    map.centers_ = std::move(centers);
    map.width_ = width;
    return map;
}

std::size_t FeatureMap::dim() const {
    switch (kind_) {
        case Kind::identity: return 1;
        case Kind::polynomial: return static_cast<std::size_t>(degree_) + 1;
        case Kind::radial_basis: return centers_.size();
    }
    return 0;
}

std::vector<double> FeatureMap::operator()(double state) const {
    if (!std::isfinite(state)) throw DomainError("feature map applied to a non-finite state");
    std::vector<double> phi(dim());
    switch (kind_) {
        case Kind::identity:
            phi[0] = state;
            break;
        case Kind::polynomial: {
            double p = 1.0;
            for (auto& v : phi) {
                v = p;
                p *= state;
            }
            break;
        }
        case Kind::radial_basis:
            for (std::size_t i = 0; i < centers_.size(); ++i) {
                const double z = (state - centers_[i]) / width_;
                phi[i] = std::exp(-0.5 * z * z);
            }
            break;
    }
    return phi;
}

double FeatureMap::bound(double lo, double hi) const {
    if (!(lo <= hi)) throw DomainError("feature bound needs lo <= hi");
    constexpr int kGrid = 10000;
    double best = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / kGrid;
        const auto phi = (*this)(s);
        best = std::max(best, std::sqrt(std::inner_product(phi.begin(), phi.end(), phi.begin(), 0.0)));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Parameters

void PolicyParams::clamp_scale(double delta0) { y = std::max(y, std::log(delta0)); }

std::vector<double> PolicyParams::flatten() const {
    std::vector<double> out(x);
    out.push_back(y);
    return out;
}

// ---------------------------------------------------------------------------
// Exp-power constants

namespace {

template <typename Compute>
double cached(std::map<double, double>& table, std::mutex& mutex, double alpha, Compute compute) {
    {
        std::lock_guard lock(mutex);
        if (auto it = table.find(alpha); it != table.end()) return it->second;
    }
    const double value = compute(alpha);
    std::lock_guard lock(mutex);
    table.emplace(alpha, value);
    return value;
}

double half_line_integral(auto f) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12,
                                                &error);
}

void check_alpha(double alpha) {
    if (!(alpha >= 1.0 && alpha <= 2.0)) {
        throw DomainError("exp_power tail index must lie in [1, 2], got " + std::to_string(alpha));
    }
}

}  // namespace

double exp_power_normalizer(double alpha) {
    check_alpha(alpha);
    static std::map<double, double> table;
    static std::mutex mutex;
    return cached(table, mutex, alpha, [](double al) {
        return 2.0 * half_line_integral([al](double x) { return std::exp(-std::pow(x, al)); });
    });
}

double exp_power_tail_moment(double alpha) {
    check_alpha(alpha);
    static std::map<double, double> table;
    static std::mutex mutex;
    return cached(table, mutex, alpha, [](double al) {
        return 2.0 * half_line_integral(
                         [al](double x) { return std::pow(x, al - 1.0) * std::exp(-0.5 * std::pow(x, al)); });
    });
}

double exp_power_envelope(double alpha) {
    check_alpha(alpha);
    static std::map<double, double> table;
    static std::mutex mutex;
    return cached(table, mutex, alpha, [](double al) {
        auto envelope = [al](double z) { return (1.0 + z * z) * std::exp(-std::pow(std::abs(z), al)); };
        // coarse scan, then Brent refinement around the best grid cell
        double best_z = 0.0;
        double best = envelope(0.0);
        for (int i = 1; i <= 2000; ++i) {
            const double z = 0.005 * i;
            if (const double v = envelope(z); v > best) {
                best = v;
                best_z = z;
            }
        }
        const auto refined = boost::math::tools::brent_find_minima(
            [&](double z) { return -envelope(z); }, std::max(0.0, best_z - 0.005), best_z + 0.005, 50);
        return std::max(best, -refined.second);
    });
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(PolicyKind kind, FeatureMap features, double delta0)
    : kind_(kind), features_(std::move(features)), delta0_(delta0) {
    kind_.validate();
    if (!(delta0_ > 0.0)) throw DomainError("scale floor delta0 must be positive");
    if (kind_.family == Family::exp_power) {
        // warm the caches so concurrent samplers only read
        exp_power_normalizer(kind_.alpha);
        exp_power_envelope(kind_.alpha);
    }
}

PolicyParams Policy::initial_params(std::vector<double> x, double y) const {
    if (x.size() != features_.dim()) {
        throw DomainError("initial x has " + std::to_string(x.size()) + " weights but the feature map has dimension " +
                          std::to_string(features_.dim()));
    }
    PolicyParams params{std::move(x), y};
    params.clamp_scale(delta0_);
    return params;
}

void Policy::check_inputs(const PolicyParams& params, std::span<const double> phi, double action) const {
    if (params.x.size() != phi.size()) {
        throw DomainError("feature dimension " + std::to_string(phi.size()) + " does not match weight dimension " +
                          std::to_string(params.x.size()));
    }
    if (!std::isfinite(action)) throw DomainError("non-finite action");
    for (double v : phi) {
        if (!std::isfinite(v)) throw DomainError("non-finite feature value");
    }
    if (!std::isfinite(params.y)) throw DomainError("non-finite log-scale parameter");
}

double Policy::location(const PolicyParams& params, std::span<const double> phi) const {
    if (params.x.size() != phi.size()) {
        throw DomainError("feature dimension " + std::to_string(phi.size()) + " does not match weight dimension " +
                          std::to_string(params.x.size()));
    }
    return std::inner_product(phi.begin(), phi.end(), params.x.begin(), 0.0);
}

double Policy::scale(const PolicyParams& params) const {
    return kind_.family == Family::gaussian ? std::exp(0.5 * params.y) : std::exp(params.y);
}

double Policy::log_density(const PolicyParams& params, std::span<const double> phi, double action) const {
    check_inputs(params, phi, action);
    const double diff = action - location(params, phi);
    switch (kind_.family) {
        case Family::gaussian: {
            const double variance = std::exp(params.y);
            return -0.5 * std::log(2.0 * std::numbers::pi * variance) - diff * diff / (2.0 * variance);
        }
        case Family::exp_power: {
            const double u = diff / std::exp(params.y);
            return -params.y - std::log(exp_power_normalizer(kind_.alpha)) - std::pow(std::abs(u), kind_.alpha);
        }
        case Family::cauchy: {
            const double u = diff / std::exp(params.y);
            return -params.y - std::log(std::numbers::pi) - std::log1p(u * u);
        }
    }
    return 0.0;
}

double Policy::density(const PolicyParams& params, std::span<const double> phi, double action) const {
    return std::exp(log_density(params, phi, action));
}

std::vector<double> Policy::score(const PolicyParams& params, std::span<const double> phi, double action) const {
    check_inputs(params, phi, action);
    const double diff = action - location(params, phi);
    double d_location = 0.0;  // d log pi / d (phi^T x)
    double d_y = 0.0;
    switch (kind_.family) {
        case Family::gaussian: {
            const double variance = std::exp(params.y);
            d_location = diff / variance;
            d_y = -0.5 + diff * diff / (2.0 * variance);
            break;
        }
        case Family::exp_power: {
            const double s = std::exp(params.y);
            const double u = diff / s;
            const double au = std::abs(u);
            const double sign = (u > 0.0) - (u < 0.0);
            d_location = kind_.alpha * std::pow(au, kind_.alpha - 1.0) * sign / s;
            d_y = -1.0 + kind_.alpha * std::pow(au, kind_.alpha);
            break;
        }
        case Family::cauchy: {
            const double s = std::exp(params.y);
            const double u = diff / s;
            d_location = 2.0 * u / ((1.0 + u * u) * s);
            d_y = (u * u - 1.0) / (1.0 + u * u);
            break;
        }
    }
    std::vector<double> out(phi.size() + 1);
    for (std::size_t i = 0; i < phi.size(); ++i) out[i] = d_location * phi[i];
    out.back() = d_y;
    return out;
}

double Policy::sample_action(const PolicyParams& params, std::span<const double> phi, SeededStream& stream) const {
    const double mu = location(params, phi);
    switch (kind_.family) {
        case Family::gaussian:
            return mu + std::exp(0.5 * params.y) * stream.normal();
        case Family::cauchy:
            return mu + std::exp(params.y) * std::tan(std::numbers::pi * (stream.uniform() - 0.5));
        case Family::exp_power: {
            // Rejection from a standard Cauchy proposal: accept z with probability
            // (1 + z^2) exp(-|z|^alpha) / sup_z[(1 + z^2) exp(-|z|^alpha)].
            const double envelope = exp_power_envelope(kind_.alpha);
            while (true) {
                const double z = std::tan(std::numbers::pi * (stream.uniform() - 0.5));
                const double ratio = (1.0 + z * z) * std::exp(-std::pow(std::abs(z), kind_.alpha)) / envelope;
                if (stream.uniform() <= ratio) return mu + std::exp(params.y) * z;
            }
        }
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Exploration tolerance

double exploration_tolerance_bound(double alpha, double sigma, double lambda, double d_phi, double d_theta) {
    if (!(alpha > 1.0 && alpha <= 2.0)) {
        throw DomainError("exploration bound needs alpha in (1, 2], got " + std::to_string(alpha));
    }
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("exploration tolerance lambda must lie in (0, 1) for the exp_power family");
    }
    if (!(sigma > 0.0 && d_phi > 0.0 && d_theta >= 0.0)) {
        throw DomainError("exploration bound needs sigma > 0, D_phi > 0 and D_Theta >= 0");
    }
    const double a_alpha = exp_power_normalizer(alpha);
    const double b_alpha = exp_power_tail_moment(alpha);
    const double log_term = std::max(0.0, std::log(d_phi * b_alpha / (sigma * a_alpha * lambda)));
    const double inner = d_theta * d_phi / sigma + 2.0 * log_term;
    return (d_phi / sigma) * std::pow(inner, (alpha - 1.0) / alpha);
}

double cauchy_score_bound(double sigma, double d_phi) {
    if (!(sigma > 0.0 && d_phi >= 0.0)) throw DomainError("cauchy score bound needs sigma > 0 and D_phi >= 0");
    // with s = 2u/(1+u^2) the squared score norm is (D_phi/sigma)^2 s^2 + (1 - s^2), s^2 in [0, 1]
    return std::max(d_phi / sigma, 1.0);
}

double exploration_tolerance_bound(const PolicyKind& kind, double sigma, double lambda, double d_phi,
                                   double d_theta) {
    switch (kind.family) {
        case Family::cauchy:
            if (lambda < 0.0) throw DomainError("exploration tolerance lambda must be non-negative");
            return cauchy_score_bound(sigma, d_phi);
        case Family::gaussian:
            return exploration_tolerance_bound(2.0, sigma, lambda, d_phi, d_theta);
        case Family::exp_power:
            return exploration_tolerance_bound(kind.alpha, sigma, lambda, d_phi, d_theta);
    }
    return 0.0;
}

}  // namespace hpg
