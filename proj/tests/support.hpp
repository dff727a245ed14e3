// Independent statistical oracles and small fixture environments shared by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hpg/environments.hpp"
#include "hpg/stable_random.hpp"

namespace testing {

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// Linear-interpolated empirical quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double f = pos - static_cast<double>(i);
    return sorted[i] * (1.0 - f) + sorted[i + 1] * f;
}

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, p);
}

/// sup_x |F_n(x) - F(x)|, evaluated at every sample point (both one-sided limits).
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic two-sample KS critical value at significance 0.001.
inline double ks_two_sample_critical(std::size_t n, std::size_t m) {
    const double c = std::sqrt(-0.5 * std::log(0.001 / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

/// CDF of the unit SaS law (E e^{iwX} = e^{-|w|^alpha}) by Gil-Pelaez inversion:
/// F(x) = 1/2 + (1/pi) int_0^inf sin(w x) e^{-w^alpha} / w dw.
inline double stable_cdf(double x, double alpha) {
    if (x == 0.0) return 0.5;
    const double upper = std::pow(40.0, 1.0 / alpha);
    auto f = [&](double w) { return w == 0.0 ? x : std::sin(w * x) * std::exp(-std::pow(w, alpha)) / w; };
    double err = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 25, 1e-12, &err);
    return 0.5 + integral / std::numbers::pi;
}

/// Density of the unit SaS law: (1/pi) int_0^inf cos(w x) e^{-w^alpha} dw.
inline double stable_pdf(double x, double alpha) {
    const double upper = std::pow(40.0, 1.0 / alpha);
    auto f = [&](double w) { return std::cos(w * x) * std::exp(-std::pow(w, alpha)); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 25, 1e-12, &err) /
           std::numbers::pi;
}

/// Upper-tail probability of a chi-square statistic.
inline double chi2_pvalue(double statistic, double dof) {
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Multiplies every reward of a wrapped environment by a constant.
class ScaledRewardEnv final : public hpg::Environment {
public:
    ScaledRewardEnv(std::shared_ptr<const hpg::Environment> inner, double c) : inner_(std::move(inner)), c_(c) {}

    std::string name() const override { return "scaled"; }
    hpg::EnvState reset(hpg::SeededStream& s) const override { return inner_->reset(s); }
    hpg::StepResult step(const hpg::EnvState& st, double a, hpg::SeededStream& s) const override {
        auto r = inner_->step(st, a, s);
        r.reward *= c_;
        return r;
    }
    double reward_bound() const override { return std::abs(c_) * inner_->reward_bound(); }
    double state_lower() const override { return inner_->state_lower(); }
    double state_upper() const override { return inner_->state_upper(); }
    double action_limit() const override { return inner_->action_limit(); }
    std::size_t horizon_cap() const override { return inner_->horizon_cap(); }
    std::unique_ptr<hpg::Environment> clone() const override { return std::make_unique<ScaledRewardEnv>(*this); }

private:
    std::shared_ptr<const hpg::Environment> inner_;
    double c_;
};

/// Every reward is zero; episodes run to the horizon cap.
class ZeroRewardEnv final : public hpg::Environment {
public:
    std::string name() const override { return "zero"; }
    hpg::EnvState reset(hpg::SeededStream&) const override { return {0.5, 0, false}; }
    hpg::StepResult step(const hpg::EnvState& st, double a, hpg::SeededStream&) const override {
        hpg::EnvState next{std::clamp(st.s + 0.01 * a, 0.0, 1.0), st.step_count + 1, false};
        next.done = next.step_count >= 50;
        return {next, 0.0, false};
    }
    double reward_bound() const override { return 0.0; }
    double state_lower() const override { return 0.0; }
    double state_upper() const override { return 1.0; }
    double action_limit() const override { return 1e9; }
    std::size_t horizon_cap() const override { return 1000; }
    std::unique_ptr<hpg::Environment> clone() const override { return std::make_unique<ZeroRewardEnv>(*this); }
};

/// Two-step MDP over states {0, 1}: s0 = 0, s1 = 1{a0 > 0}, r(s, a) = -(a - s)^2,
/// the episode ends after the second step. The horizon cap is never reached,
/// so the random-horizon estimate is unbiased for J = E[r0 + gamma r1].
class TwoStateMdp final : public hpg::Environment {
public:
    std::string name() const override { return "two_state"; }
    hpg::EnvState reset(hpg::SeededStream&) const override { return {0.0, 0, false}; }
    hpg::StepResult step(const hpg::EnvState& st, double a, hpg::SeededStream&) const override {
        const double r = -(a - st.s) * (a - st.s);
        hpg::EnvState next{st.step_count == 0 ? (a > 0.0 ? 1.0 : 0.0) : st.s, st.step_count + 1, false};
        next.done = next.step_count >= 2;
        return {next, r, false};
    }
    double reward_bound() const override { return 1e12; }
    double state_lower() const override { return 0.0; }
    double state_upper() const override { return 1.0; }
    double action_limit() const override { return 1e12; }
    std::size_t horizon_cap() const override { return 100000; }
    std::unique_ptr<hpg::Environment> clone() const override { return std::make_unique<TwoStateMdp>(*this); }
};

}  // namespace testing
