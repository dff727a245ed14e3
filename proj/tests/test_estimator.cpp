#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "hpg/estimator.hpp"
#include "hpg/errors.hpp"
#include "support.hpp"

using namespace hpg;

namespace {

Policy gaussian(FeatureMap map = FeatureMap::polynomial(1)) {
    PolicyKind k;
    k.family = Family::gaussian;
    return Policy(k, std::move(map));
}

Policy cauchy(FeatureMap map = FeatureMap::polynomial(1)) {
    PolicyKind k;
    k.family = Family::cauchy;
    return Policy(k, std::move(map));
}

struct MeanSe {
    std::vector<double> mean, se;
};

MeanSe monte_carlo(const Environment& env, const Policy& pol, const PolicyParams& p, double gamma, std::size_t n,
                   std::uint64_t seed) {
    const std::size_t d = p.dim();
    std::vector<double> s1(d, 0.0), s2(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        SeededStream s(seed, i);
        const auto g = gpomdp_estimate(rollout(env, pol, p, gamma, s), pol, p, gamma).g;
        for (std::size_t j = 0; j < d; ++j) {
            s1[j] += g[j];
            s2[j] += g[j] * g[j];
        }
    }
    MeanSe out{std::vector<double>(d), std::vector<double>(d)};
    const double nn = static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        out.mean[j] = s1[j] / nn;
        out.se[j] = std::sqrt((s2[j] / nn - out.mean[j] * out.mean[j]) / (nn - 1));
    }
    return out;
}

}  // namespace

TEST_CASE("gamma zero gives a single step") {
    PathologicalMountainCar env;
    const auto pol = cauchy();
    const auto p = pol.initial_params({0.0, 0.0}, std::log(0.3));
    for (std::uint64_t i = 0; i < 50; ++i) {
        SeededStream s(0, i);
        const auto t = rollout(env, pol, p, 0.0, s);
        CHECK(t.horizon == 0);
        CHECK(t.steps.size() == 1);
        CHECK(t.steps[0].state == 2.26);
    }
}

TEST_CASE("rollouts are reproducible") {
    PathologicalMountainCar env;
    const auto pol = cauchy();
    const auto p = pol.initial_params({-0.5, 0.1}, std::log(0.3));
    SeededStream a(5, 5), b(5, 5);
    const auto t1 = rollout(env, pol, p, 0.97, a), t2 = rollout(env, pol, p, 0.97, b);
    REQUIRE(t1.steps.size() == t2.steps.size());
    for (std::size_t i = 0; i < t1.steps.size(); ++i) {
        CHECK(t1.steps[i].action == t2.steps[i].action);
        CHECK(t1.steps[i].reward == t2.steps[i].reward);
    }
    CHECK(t1.scores == t2.scores);
}

TEST_CASE("trajectory length and mean horizon") {
    // P[T >= 500] is about 5e-4 at gamma 0.97, so a larger cap keeps every draw untruncated
    Mario1D env(MarioConfig{.horizon_cap = 5000});
    const auto pol = gaussian();
    const auto p = pol.initial_params({0.0, 0.0}, std::log(0.01));
    double sum = 0.0;
    std::size_t truncated = 0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) {
        SeededStream s(1, i);
        const auto t = rollout(env, pol, p, 0.97, s);
        CHECK(t.steps.size() == t.horizon + 1);
        sum += static_cast<double>(t.horizon);
        truncated += t.truncated;
    }
    CHECK(sum / n == doctest::Approx(65.17).epsilon(0.02));
    CHECK(truncated == 0);
}

TEST_CASE("early termination pads with absorbing zero-reward steps") {
    PathologicalMountainCar env(PmcConfig{.dt = 1.0, .init = -3.9});
    const auto pol = cauchy();
    // mode -5 from anywhere: the first step lands in the goal band
    const auto p = pol.initial_params({-5.0, 0.0}, std::log(0.01));
    for (std::uint64_t i = 0; i < 200; ++i) {
        SeededStream s(2, i);
        const auto t = rollout(env, pol, p, 0.97, s);
        if (t.horizon == 0) continue;
        CHECK(t.env_steps == 1);
        for (std::size_t k = 1; k < t.steps.size(); ++k) {
            CHECK(t.steps[k].absorbing);
            CHECK(t.steps[k].reward == 0.0);
        }
    }
}

TEST_CASE("horizon longer than the cap is truncated and flagged") {
    Mario1D env(MarioConfig{.horizon_cap = 5});
    const auto pol = gaussian();
    const auto p = pol.initial_params({0.0, 0.0}, 0.0);
    std::size_t flagged = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        SeededStream s(3, i);
        const auto t = rollout(env, pol, p, 0.97, s);
        CHECK(t.steps.size() <= 5);
        flagged += t.truncated;
    }
    CHECK(flagged > 0);
}

TEST_CASE("zero rewards give a zero estimate") {
    testing::ZeroRewardEnv env;
    const auto pol = gaussian();
    const auto p = pol.initial_params({0.3, -0.2}, 0.0);
    SeededStream s(4, 0);
    const auto g = gpomdp_estimate(rollout(env, pol, p, 0.9, s), pol, p, 0.9).g;
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("T = 0 gives reward times score") {
    QuadraticBandit env(1.0, 0.5);
    const auto pol = gaussian(FeatureMap::identity());
    const auto p = pol.initial_params({0.2}, std::log(0.5));
    SeededStream s(5, 0);
    const auto t = rollout(env, pol, p, 0.0, s);
    const auto g = gpomdp_estimate(t, pol, p, 0.0).g;
    const std::vector<double> phi{1.0};
    const auto sc = pol.score(p, phi, t.steps[0].action);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(t.steps[0].reward * sc[j]));
}

TEST_CASE("estimate equals the literal double sum") {
    PathologicalMountainCar env(PmcConfig{.dt = 0.2});
    const auto pol = cauchy();
    const auto p = pol.initial_params({-0.4, 0.3}, std::log(0.5));
    for (std::uint64_t i = 0; i < 20; ++i) {
        SeededStream s(6, i);
        const auto t = rollout(env, pol, p, 0.9, s);
        const auto g = gpomdp_estimate(t, pol, p, 0.9).g;
        std::vector<double> brute(p.dim(), 0.0);
        for (std::size_t k = 0; k < t.steps.size(); ++k) {
            std::vector<double> cum(p.dim(), 0.0);
            for (std::size_t tau = 0; tau <= k; ++tau) {
                if (t.steps[tau].absorbing) continue;
                const auto sc = pol.score(p, pol.featurize(t.steps[tau].state), t.steps[tau].action);
                for (std::size_t j = 0; j < cum.size(); ++j) cum[j] += sc[j];
            }
            for (std::size_t j = 0; j < cum.size(); ++j) brute[j] += std::pow(0.9, k / 2.0) * t.steps[k].reward * cum[j];
        }
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(brute[j]).epsilon(1e-10));
    }
}

TEST_CASE("dimension mismatch is rejected") {
    QuadraticBandit env(1.0, 0.0);
    const auto pol = gaussian();
    const auto p = pol.initial_params({0.0, 0.0}, 0.0);
    SeededStream s(0, 0);
    const auto t = rollout(env, pol, p, 0.0, s);
    PolicyParams wrong{{0.0, 0.0, 0.0}, 0.0};
    CHECK_THROWS_AS(gpomdp_estimate(t, pol, wrong, 0.0), DomainError);
}

TEST_CASE("unbiased on the one-step gaussian bandit") {
    // r(a) = -a^2, a ~ N(phi^T x, e^y): J = -(mu^2 + e^y), dJ/dx = -2 mu phi, dJ/dy = -e^y.
    const double state = 0.8;
    QuadraticBandit env(state, 0.0);
    const auto pol = gaussian();
    const auto p = pol.initial_params({0.4, -0.9}, std::log(0.6));
    const std::vector<double> phi{1.0, state};
    const double mu = pol.location(p, phi), v = 0.6;
    const std::vector<double> exact{-2 * mu * phi[0], -2 * mu * phi[1], -v};
    const auto mc = monte_carlo(env, pol, p, 0.0, 100'000, 7);
    for (std::size_t j = 0; j < 3; ++j) {
        CAPTURE(j);
        CHECK(std::abs(mc.mean[j] - exact[j]) < 3.0 * mc.se[j]);
    }
}

TEST_CASE("unbiased on a two-state MDP") {
    testing::TwoStateMdp env;
    const auto pol = gaussian();
    const double gamma = 0.81;
    const auto p = pol.initial_params({0.3, 0.5}, std::log(0.4));
    // J = E[r0] + gamma E[r1], by direct evaluation of the Gaussian moments
    auto J = [&](const PolicyParams& q) {
        const double v = std::exp(q.y), x0 = q.x[0], x1 = q.x[1];
        const double up = boost::math::cdf(boost::math::complement(boost::math::normal(x0, std::sqrt(v)), 0.0));
        const double r0 = -(x0 * x0 + v);
        const double r1_up = -((x0 + x1 - 1.0) * (x0 + x1 - 1.0) + v);
        const double r1_down = -(x0 * x0 + v);
        return r0 + gamma * (up * r1_up + (1 - up) * r1_down);
    };
    std::vector<double> exact(3);
    const double h = 1e-5;
    for (std::size_t j = 0; j < 3; ++j) {
        auto plus = p, minus = p;
        if (j < 2) {
            plus.x[j] += h;
            minus.x[j] -= h;
        } else {
            plus.y += h;
            minus.y -= h;
        }
        exact[j] = (J(plus) - J(minus)) / (2 * h);
    }
    const auto mc = monte_carlo(env, pol, p, gamma, 100'000, 8);
    for (std::size_t j = 0; j < 3; ++j) {
        CAPTURE(j);
        CHECK(std::abs(mc.mean[j] - exact[j]) < 3.0 * mc.se[j]);
    }
}

TEST_CASE("scaling rewards scales the estimate") {
    auto inner = std::make_shared<PathologicalMountainCar>(PmcConfig{.dt = 0.3});
    testing::ScaledRewardEnv four(inner, 4.0), three(inner, 3.0);
    const auto pol = cauchy();
    const auto p = pol.initial_params({-0.2, 0.1}, std::log(0.7));
    for (std::uint64_t i = 0; i < 50; ++i) {
        SeededStream a(9, i), b(9, i), c(9, i);
        const auto g = gpomdp_estimate(rollout(*inner, pol, p, 0.97, a), pol, p, 0.97).g;
        const auto g4 = gpomdp_estimate(rollout(four, pol, p, 0.97, b), pol, p, 0.97).g;
        const auto g3 = gpomdp_estimate(rollout(three, pol, p, 0.97, c), pol, p, 0.97).g;
        for (std::size_t j = 0; j < g.size(); ++j) {
            CHECK(g4[j] == 4.0 * g[j]);
            CHECK(g3[j] == doctest::Approx(3.0 * g[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("batch of one equals a single estimate") {
    PathologicalMountainCar env;
    const auto pol = cauchy();
    const auto p = pol.initial_params({0.1, 0.0}, std::log(0.3));
    const StreamSet set{11, 40, 1};
    const auto b = batch_estimate(env, pol, p, 0.97, 1, set);
    SeededStream s(11, 40);
    const auto g = gpomdp_estimate(rollout(env, pol, p, 0.97, s), pol, p, 0.97).g;
    CHECK(b.estimate.g == g);
    CHECK(b.estimate.batch_size == 1);
}

TEST_CASE("batch reduction is ordered and independent of workers") {
    PathologicalMountainCar env(PmcConfig{.dt = 1.0});
    const auto pol = cauchy();
    const auto p = pol.initial_params({-1.0, 0.2}, std::log(0.3));
    const StreamSet set{12, 100, 4};
    const auto one = batch_estimate(env, pol, p, 0.97, 4, set, 1);
    const auto four = batch_estimate(env, pol, p, 0.97, 4, set, 4);
    CHECK(one.estimate.g == four.estimate.g);
    CHECK(one.mean_return == four.mean_return);

    std::vector<double> sum(p.dim(), 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        auto s = set.stream(i);
        const auto g = gpomdp_estimate(rollout(env, pol, p, 0.97, s), pol, p, 0.97).g;
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
    }
    for (auto& v : sum) v /= 4.0;
    CHECK(one.estimate.g == sum);
    CHECK_THROWS_AS(batch_estimate(env, pol, p, 0.97, 0, set), DomainError);
    CHECK_THROWS_AS(batch_estimate(env, pol, p, 0.97, 5, set), DomainError);
}

TEST_CASE("batch variance scales as 1/B") {
    QuadraticBandit env(1.0, 0.0);
    const auto pol = gaussian(FeatureMap::identity());
    const auto p = pol.initial_params({0.5}, std::log(0.5));
    auto var_of = [&](std::size_t batch) {
        const int n = 20'000;
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) {
            const StreamSet set{13, static_cast<std::uint64_t>(i) * 64, batch};
            xs[i] = batch_estimate(env, pol, p, 0.0, batch, set).estimate.g[0];
        }
        return testing::variance(xs);
    };
    const double ratio = var_of(8) / var_of(1);
    CHECK(ratio == doctest::Approx(1.0 / 8).epsilon(0.2));
}
