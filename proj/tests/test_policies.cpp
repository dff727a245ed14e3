#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hpg/errors.hpp"
#include "hpg/policies.hpp"
#include "support.hpp"

using namespace hpg;

namespace {

Policy make(Family f, double alpha = 2.0, FeatureMap map = FeatureMap::polynomial(1)) {
    PolicyKind k;
    k.family = f;
    k.alpha = alpha;
    return Policy(k, std::move(map));
}

// Integrates the density over the whole line through a = m + c tan(u), which
// maps the heavy Cauchy tails onto a bounded interval.
double total_mass(const Policy& pol, const PolicyParams& p, std::span<const double> phi) {
    const double m = pol.location(p, phi), c = pol.scale(p);
    auto f = [&](double u) {
        const double t = std::tan(u), sec2 = 1.0 + t * t;
        return pol.density(p, phi, m + c * t) * c * sec2;
    };
    const double h = std::numbers::pi / 2;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -h, h, 15, 1e-10, &err);
}

double uniform(SeededStream& s, double lo, double hi) { return lo + (hi - lo) * s.uniform(); }

}  // namespace

TEST_CASE("quadrature constants match closed forms") {
    for (double alpha : {1.0, 1.25, 1.5, 1.8, 2.0}) {
        CAPTURE(alpha);
        CHECK(exp_power_normalizer(alpha) == doctest::Approx(2.0 * std::tgamma(1.0 + 1.0 / alpha)).epsilon(1e-9));
        CHECK(exp_power_tail_moment(alpha) == doctest::Approx(4.0 / alpha).epsilon(1e-9));
    }
    CHECK(exp_power_normalizer(2.0) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-10));
}

TEST_CASE("family names and kind validation") {
    CHECK(family_from_string("cauchy") == Family::cauchy);
    CHECK(to_string(Family::exp_power) == "exp_power");
    CHECK_THROWS_AS(family_from_string("laplace"), DomainError);
    PolicyKind k;
    k.family = Family::exp_power;
    k.alpha = 0.9;
    CHECK_THROWS_AS(k.validate(), DomainError);
    k.alpha = 2.1;
    CHECK_THROWS_AS(k.validate(), DomainError);
}

TEST_CASE("feature maps") {
    const auto poly = FeatureMap::polynomial(2);
    CHECK(poly.dim() == 3);
    CHECK(poly(2.0) == std::vector<double>{1.0, 2.0, 4.0});
    CHECK(FeatureMap::identity()(3.5) == std::vector<double>{3.5});
    const auto rbf = FeatureMap::radial_basis({0.0, 1.0}, 0.5);
    CHECK(rbf.dim() == 2);
    CHECK(rbf(0.0)[0] == doctest::Approx(1.0));
    CHECK(poly.bound(-4.0, 3.709) == doctest::Approx(std::sqrt(1.0 + 16.0 + 256.0)));
    CHECK_THROWS_AS(FeatureMap::identity()(std::nan("")), DomainError);
}

TEST_CASE("log-density examples") {
    const std::vector<double> phi{1.0, 0.4};
    PolicyParams p{{0.3, -0.5}, 0.0};
    const double mode = 0.3 - 0.5 * 0.4;

    const auto cauchy = make(Family::cauchy);
    CHECK(cauchy.log_density(p, phi, mode) == doctest::Approx(-std::log(std::numbers::pi)));
    CHECK(cauchy.log_density(p, phi, mode) == doctest::Approx(-1.14473).epsilon(1e-5));

    const auto gauss = make(Family::gaussian);
    PolicyParams g{{0.3, -0.5}, std::log(0.7)};
    const double sd = std::sqrt(0.7);
    CHECK(gauss.log_density(g, phi, mode + sd) == doctest::Approx(gauss.log_density(g, phi, mode) - 0.5));
    CHECK(gauss.log_density(g, phi, mode) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi * 0.7)));

    CHECK_THROWS_AS(gauss.log_density(g, phi, std::nan("")), DomainError);
    const std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(gauss.log_density(g, bad, 0.0), DomainError);
    const std::vector<double> short_phi{1.0};
    CHECK_THROWS_AS(gauss.log_density(g, short_phi, 0.0), DomainError);
}

TEST_CASE("exp_power alpha 1.5 integrates to one") {
    const auto pol = make(Family::exp_power, 1.5, FeatureMap::identity());
    const std::vector<double> phi{1.0};
    PolicyParams p{{0.0}, 0.0};
    CHECK(total_mass(pol, p, phi) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("normalisation for random parameters, every family") {
    SeededStream s(17, 0);
    for (auto [fam, alpha] : {std::pair{Family::gaussian, 2.0}, std::pair{Family::cauchy, 1.0},
                              std::pair{Family::exp_power, 1.3}, std::pair{Family::exp_power, 1.8}}) {
        const auto pol = make(fam, alpha);
        for (int i = 0; i < 20; ++i) {
            PolicyParams p{{uniform(s, -2, 2), uniform(s, -2, 2)}, uniform(s, -2, 1.5)};
            const std::vector<double> phi = pol.featurize(uniform(s, -4, 3.7));
            CAPTURE(to_string(fam));
            CHECK(std::abs(total_mass(pol, p, phi) - 1.0) < 1e-5);
        }
    }
}

TEST_CASE("score: x-block vanishes at the mode") {
    const std::vector<double> phi{1.0, -0.8};
    PolicyParams p{{0.2, 0.9}, 0.3};
    for (auto [fam, alpha] : {std::pair{Family::gaussian, 2.0}, std::pair{Family::cauchy, 1.0},
                              std::pair{Family::exp_power, 1.5}}) {
        const auto pol = make(fam, alpha);
        const auto g = pol.score(p, phi, pol.location(p, phi));
        CHECK(g[0] == doctest::Approx(0.0));
        CHECK(g[1] == doctest::Approx(0.0));
    }
}

TEST_CASE("cauchy y-score is zero one scale from the mode") {
    const auto pol = make(Family::cauchy);
    const std::vector<double> phi{1.0, 2.0};
    PolicyParams p{{0.1, 0.2}, 0.4};
    const double a = pol.location(p, phi) + std::exp(0.4);
    CHECK(pol.score(p, phi, a)[2] == doctest::Approx(0.0).epsilon(1e-12));
    // general u: (u^2 - 1) / (1 + u^2)
    const double u = 2.5;
    CHECK(pol.score(p, phi, pol.location(p, phi) + u * std::exp(0.4))[2] ==
          doctest::Approx((u * u - 1) / (1 + u * u)));
}

TEST_CASE("score matches central finite differences") {
    SeededStream s(3, 0);
    for (auto [fam, alpha] : {std::pair{Family::gaussian, 2.0}, std::pair{Family::cauchy, 1.0},
                              std::pair{Family::exp_power, 1.5}, std::pair{Family::exp_power, 1.0}}) {
        const auto pol = make(fam, alpha);
        for (int i = 0; i < 100; ++i) {
            PolicyParams p{{uniform(s, -1, 1), uniform(s, -1, 1)}, uniform(s, -1, 1)};
            const auto phi = pol.featurize(uniform(s, -2, 2));
            // keep the action off the mode, where alpha = 1 has a kink
            const double off = uniform(s, 0.2, 2.0) * (s.uniform() < 0.5 ? -1 : 1);
            const double a = pol.location(p, phi) + off;
            const auto g = pol.score(p, phi, a);
            const double h = 1e-5;
            for (std::size_t j = 0; j < p.dim(); ++j) {
                auto plus = p, minus = p;
                if (j < p.x.size()) {
                    plus.x[j] += h;
                    minus.x[j] -= h;
                } else {
                    plus.y += h;
                    minus.y -= h;
                }
                const double fd = (pol.log_density(plus, phi, a) - pol.log_density(minus, phi, a)) / (2 * h);
                CHECK(std::abs(g[j] - fd) < 1e-4);
            }
        }
    }
}

TEST_CASE("gaussian score: 1e-6 relative agreement") {
    const auto pol = make(Family::gaussian);
    SeededStream s(4, 0);
    for (int i = 0; i < 50; ++i) {
        PolicyParams p{{uniform(s, -1, 1), uniform(s, -1, 1)}, uniform(s, -1, 1)};
        const auto phi = pol.featurize(uniform(s, -2, 2));
        const double a = pol.location(p, phi) + uniform(s, -2, 2);
        const auto g = pol.score(p, phi, a);
        for (std::size_t j = 0; j < p.dim(); ++j) {
            // log-density is quadratic in x, so the central difference is exact up to round-off
            const double h = 1e-4;
            auto plus = p, minus = p;
            if (j < p.x.size()) {
                plus.x[j] += h;
                minus.x[j] -= h;
            } else {
                plus.y += h;
                minus.y -= h;
            }
            const double fd = (pol.log_density(plus, phi, a) - pol.log_density(minus, phi, a)) / (2 * h);
            CHECK(std::abs(g[j] - fd) <= 1e-6 * std::max(1.0, std::abs(g[j])));
        }
    }
}

TEST_CASE("cauchy sampler: median and quartiles") {
    const auto pol = make(Family::cauchy);
    const std::vector<double> phi{1.0, 1.5};
    PolicyParams p{{0.5, 1.0}, std::log(0.6)};
    const double m = pol.location(p, phi);
    SeededStream s(5, 0);
    std::vector<double> v(1'000'000);
    for (auto& a : v) a = pol.sample_action(p, phi, s);
    std::sort(v.begin(), v.end());
    CHECK(testing::quantile_sorted(v, 0.5) == doctest::Approx(m).epsilon(0.005));
    CHECK(testing::quantile_sorted(v, 0.25) == doctest::Approx(m - 0.6).epsilon(0.005));
    CHECK(testing::quantile_sorted(v, 0.75) == doctest::Approx(m + 0.6).epsilon(0.005));
}

TEST_CASE("gaussian sampler: mean and variance") {
    const auto pol = make(Family::gaussian);
    const std::vector<double> phi{1.0, -1.0};
    PolicyParams p{{2.0, 0.5}, std::log(0.8)};
    SeededStream s(6, 0);
    std::vector<double> v(1'000'000);
    for (auto& a : v) a = pol.sample_action(p, phi, s);
    CHECK(testing::mean(v) == doctest::Approx(1.5).epsilon(0.01));
    CHECK(testing::variance(v) == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("exp_power sampler matches its density") {
    for (double alpha : {1.0, 1.5}) {
        CAPTURE(alpha);
        const auto pol = make(Family::exp_power, alpha, FeatureMap::identity());
        const std::vector<double> phi{1.0};
        PolicyParams p{{0.25}, std::log(1.3)};
        SeededStream s(7, 0);
        std::vector<double> v(20'000);
        for (auto& a : v) a = pol.sample_action(p, phi, s);
        // CDF by quadrature of the density
        auto cdf = [&](double x) {
            double err = 0.0;
            auto f = [&](double a) { return pol.density(p, phi, a); };
            const double m = 0.25;
            const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                f, std::min(m, x), std::max(m, x), 12, 1e-10, &err);
            return x >= m ? 0.5 + half : 0.5 - half;
        };
        // 1.95 / sqrt(n): one-sample KS critical value at significance 0.001
        CHECK(testing::ks_distance(v, cdf) < 1.95 / std::sqrt(static_cast<double>(v.size())));
    }
}

TEST_CASE("exp_power alpha 2 matches the gaussian sampler") {
    // exp(-z^2 / s^2) has variance s^2 / 2, so the gaussian twin uses e^y = s^2 / 2.
    const auto ep = make(Family::exp_power, 2.0, FeatureMap::identity());
    const auto ga = make(Family::gaussian, 2.0, FeatureMap::identity());
    const std::vector<double> phi{1.0};
    const double s_scale = 0.9;
    PolicyParams pe{{-0.4}, std::log(s_scale)}, pg{{-0.4}, std::log(s_scale * s_scale / 2)};
    CHECK(ep.log_density(pe, phi, 0.3) == doctest::Approx(ga.log_density(pg, phi, 0.3)));
    SeededStream a(8, 0), b(8, 1);
    std::vector<double> x(100'000), y(100'000);
    for (auto& v : x) v = ep.sample_action(pe, phi, a);
    for (auto& v : y) v = ga.sample_action(pg, phi, b);
    CHECK(testing::ks_two_sample(x, y) < testing::ks_two_sample_critical(x.size(), y.size()));
}

TEST_CASE("empirical mode equals the location") {
    SeededStream s(12, 0);
    for (auto [fam, alpha] : {std::pair{Family::gaussian, 2.0}, std::pair{Family::cauchy, 1.0},
                              std::pair{Family::exp_power, 1.5}}) {
        const auto pol = make(fam, alpha, FeatureMap::identity());
        const std::vector<double> phi{1.0};
        PolicyParams p{{1.7}, std::log(0.5)};
        // seven bins of half a scale unit centred on m; the middle one must be modal
        const double m = 1.7, w = 0.5 * pol.scale(p);
        std::vector<int> hist(7, 0);
        for (int i = 0; i < 400'000; ++i) {
            const double pos = (pol.sample_action(p, phi, s) - m) / w + 3.5;
            if (pos >= 0 && pos < 7) ++hist[static_cast<int>(pos)];
        }
        CHECK(std::max_element(hist.begin(), hist.end()) - hist.begin() == 3);
    }
}

TEST_CASE("integrated score second moment is finite and stable") {
    SeededStream s(13, 0);
    for (auto [fam, alpha] : {std::pair{Family::gaussian, 2.0}, std::pair{Family::cauchy, 1.0},
                              std::pair{Family::exp_power, 1.5}}) {
        const auto pol = make(fam, alpha, FeatureMap::identity());
        const std::vector<double> phi{1.0};
        PolicyParams p{{0.0}, 0.0};
        std::vector<double> estimates;
        for (std::size_t n : {10'000u, 100'000u, 1'000'000u}) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto g = pol.score(p, phi, pol.sample_action(p, phi, s));
                acc += g[0] * g[0] + g[1] * g[1];
            }
            estimates.push_back(acc / static_cast<double>(n));
        }
        CAPTURE(to_string(fam));
        CHECK(std::isfinite(estimates.back()));
        CHECK(estimates[2] == doctest::Approx(estimates[1]).epsilon(0.05));
        CHECK(estimates[2] == doctest::Approx(estimates[0]).epsilon(0.15));
    }
}

TEST_CASE("scale clamp") {
    PolicyParams p{{0.0}, -20.0};
    p.clamp_scale(1e-3);
    CHECK(std::exp(p.y) >= 1e-3 * (1 - 1e-12));
    PolicyParams q{{0.0}, 1.0};
    q.clamp_scale(1e-3);
    CHECK(q.y == 1.0);
    const auto pol = make(Family::cauchy, 1.0, FeatureMap::identity());
    CHECK(pol.initial_params({0.0}, -50.0).y >= std::log(kDefaultScaleFloor));
}

TEST_CASE("exploration tolerance bound") {
    // direct evaluation with A_2 = sqrt(pi), B_2 = 2
    const double lambda = 1e-3;
    const double direct = std::sqrt(1.0 + 2.0 * std::log(2.0 / (std::sqrt(std::numbers::pi) * lambda)));
    CHECK(exploration_tolerance_bound(2.0, 1.0, lambda, 1.0, 1.0) == doctest::Approx(direct).epsilon(1e-10));

    const double a15 = 2.0 * std::tgamma(1.0 + 1.0 / 1.5), b15 = 4.0 / 1.5;
    const double direct15 =
        (2.0 / 0.5) * std::pow(3.0 * 2.0 / 0.5 + 2.0 * std::log(2.0 * b15 / (0.5 * a15 * 0.01)), 0.5 / 1.5);
    CHECK(exploration_tolerance_bound(1.5, 0.5, 0.01, 2.0, 3.0) == doctest::Approx(direct15).epsilon(1e-9));

    double prev = std::numeric_limits<double>::infinity();
    for (double l : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9}) {
        const double b = exploration_tolerance_bound(1.5, 1.0, l, 1.0, 1.0);
        CHECK(b < prev);
        prev = b;
    }

    CHECK_THROWS_AS(exploration_tolerance_bound(2.0, 1.0, 0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(exploration_tolerance_bound(2.0, 1.0, -0.1, 1.0, 1.0), DomainError);

    PolicyKind cauchy;
    cauchy.family = Family::cauchy;
    const double b0 = exploration_tolerance_bound(cauchy, 0.5, 0.0, 2.0, 1.0);
    CHECK(std::isfinite(b0));
    CHECK(b0 == doctest::Approx(cauchy_score_bound(0.5, 2.0)));
}

TEST_CASE("cauchy score bound holds on random actions") {
    const auto pol = make(Family::cauchy);
    SeededStream s(14, 0);
    const double sigma = 0.3;
    PolicyParams p{{0.2, -0.1}, std::log(sigma)};
    const double d_phi = FeatureMap::polynomial(1).bound(-4.0, 3.709);
    const double bound = cauchy_score_bound(sigma, d_phi);
    for (int i = 0; i < 10000; ++i) {
        const auto phi = pol.featurize(uniform(s, -4.0, 3.709));
        const auto g = pol.score(p, phi, pol.sample_action(p, phi, s));
        CHECK(std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) <= bound * (1 + 1e-12));
    }
}
