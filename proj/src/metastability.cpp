#include "hpg/metastability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "hpg/errors.hpp"
#include "parallel.hpp"

namespace hpg {

// ---------------------------------------------------------------- Polynomial

Polynomial::Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {}

Polynomial Polynomial::from_roots(std::span<const double> roots) {
    Polynomial p({1.0});
    for (double r : roots) p = p * Polynomial({-r, 1.0});
    return p;
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
    std::vector<double> a(c_.size() + 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(a));
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (c_.empty() || other.c_.empty()) return Polynomial({0.0});
    std::vector<double> out(c_.size() + other.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
        for (std::size_t j = 0; j < other.c_.size(); ++j) out[i + j] += c_[i] * other.c_[j];
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(double scalar) const {
    std::vector<double> out = c_;
    for (auto& v : out) v *= scalar;
    return Polynomial(std::move(out));
}

// ---------------------------------------------------------------- Landscape

Landscape Landscape::single_well(double curvature, double box_margin) {
    if (!(curvature > 0.0)) throw DomainError("single well curvature must be positive");
    Landscape l;
    l.kind_ = Kind::single_well;
    l.value_poly_ = Polynomial({0.0, 0.0, -0.5 * curvature});
    l.maxima_ = {0.0};
    l.finalise(box_margin);
    return l;
}

Landscape Landscape::double_well(double m1, double m2, double depth, double box_margin) {
    if (!(m1 < m2)) throw DomainError("double well needs m1 < m2");
    if (!(depth > 0.0)) throw DomainError("double well depth must be positive");
    const double h = 0.5 * (m2 - m1);
    const std::array<double, 2> roots{m1, m2};
    const Polynomial q = Polynomial::from_roots(roots) * (1.0 / (h * h));
    Landscape l;
    l.kind_ = Kind::double_well;
    l.value_poly_ = q * q * (-depth);
    l.maxima_ = {m1, m2};
    l.minima_ = {0.5 * (m1 + m2)};
    l.finalise(box_margin);
    return l;
}

Landscape Landscape::multi_well(std::vector<double> critical_points, double scale, double box_margin) {
    if (critical_points.empty() || critical_points.size() % 2 == 0) {
        throw DomainError("multi well needs an odd number of critical points");
    }
    if (!(scale > 0.0)) throw DomainError("multi well scale must be positive");
    if (!std::is_sorted(critical_points.begin(), critical_points.end()) ||
        std::adjacent_find(critical_points.begin(), critical_points.end()) != critical_points.end()) {
        throw DomainError("multi well critical points must be strictly increasing");
    }
    const Polynomial grad = Polynomial::from_roots(critical_points) * (-scale);
    Landscape l;
    l.kind_ = Kind::multi_well;
    // J(z_0) = 0
    const Polynomial anti = grad.antiderivative();
    auto c = anti.coefficients();
    c[0] -= anti(critical_points.front());
    l.value_poly_ = Polynomial(std::move(c));
    for (std::size_t i = 0; i < critical_points.size(); ++i) {
        (i % 2 == 0 ? l.maxima_ : l.minima_).push_back(critical_points[i]);
    }
    l.finalise(box_margin);
    return l;
}

Landscape Landscape::triple_well(bool symmetric, double scale) {
    Landscape l = symmetric ? multi_well({-2.25, -1.0, 0.0, 1.0, 2.25}, scale)
                            : multi_well({-2.25, -1.0, 0.0, 0.5, 1.25}, scale);
    l.kind_ = Kind::triple_well;
    return l;
}

void Landscape::finalise(double box_margin) {
    if (!(box_margin > 0.0)) throw DomainError("box margin must be positive");
    grad_poly_ = value_poly_.derivative();
    box_lo_ = maxima_.front() - box_margin;
    box_hi_ = maxima_.back() + box_margin;
    const Polynomial hess = grad_poly_.derivative();
    constexpr int kGrid = 4000;
    double lip = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = box_lo_ + (box_hi_ - box_lo_) * i / kGrid;
        lip = std::max(lip, std::abs(hess(x)));
    }
    // grid maximum of a smooth polynomial plus a small allowance
    lipschitz_ = std::max(lip * 1.01, transverse_curvature_);
}

Landscape Landscape::with_second_dimension(double transverse_curvature, std::vector<double> direction) const {
    if (!(transverse_curvature > 0.0)) throw DomainError("transverse curvature must be positive");
    if (direction.size() != 2) throw DomainError("noise direction must have two components");
    const double n = std::hypot(direction[0], direction[1]);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("noise direction must be a non-zero finite vector");
    Landscape l = *this;
    l.dim_ = 2;
    l.transverse_curvature_ = transverse_curvature;
    l.direction_ = {direction[0] / n, direction[1] / n};
    l.lipschitz_ = std::max(l.lipschitz_, transverse_curvature);
    return l;
}

double Landscape::value(std::span<const double> theta) const {
    if (theta.size() != dim_) throw DomainError("landscape value: dimension mismatch");
    double v = value_poly_(theta[0]);
    if (dim_ == 2) v -= 0.5 * transverse_curvature_ * theta[1] * theta[1];
    return v;
}

std::vector<double> Landscape::gradient(std::span<const double> theta) const {
    if (theta.size() != dim_) throw DomainError("landscape gradient: dimension mismatch");
    std::vector<double> g(dim_);
    g[0] = grad_poly_(theta[0]);
    if (dim_ == 2) g[1] = -transverse_curvature_ * theta[1];
    return g;
}

std::vector<double> Landscape::maximum_point(std::size_t well) const {
    if (well >= maxima_.size()) throw DomainError("well index " + std::to_string(well) + " out of range");
    std::vector<double> p(dim_, 0.0);
    p[0] = maxima_[well];
    return p;
}

double Landscape::d_plus(std::size_t well, double a) const {
    if (well + 1 >= maxima_.size()) throw DomainError("no well to the right of well " + std::to_string(well));
    return maxima_[well + 1] - a - maxima_[well];
}

double Landscape::d_minus(std::size_t well, double a) const {
    if (well == 0 || well >= maxima_.size()) throw DomainError("no well to the left of well " + std::to_string(well));
    return (maxima_[well - 1] + a) - maxima_[well];
}

double Landscape::basin_right(std::size_t well) const {
    if (well >= minima_.size()) throw DomainError("no basin boundary to the right of well " + std::to_string(well));
    return minima_[well] - maxima_[well];
}

double Landscape::basin_left(std::size_t well) const {
    if (well == 0 || well > minima_.size()) throw DomainError("no basin boundary to the left of well " + std::to_string(well));
    return maxima_[well] - minima_[well - 1];
}

void Landscape::clamp(std::vector<double>& theta) const {
    theta[0] = std::clamp(theta[0], box_lo_, box_hi_);
    if (dim_ == 2) {
        const double half = 0.5 * (box_hi_ - box_lo_);
        theta[1] = std::clamp(theta[1], -half, half);
    }
}

std::string to_string(Landscape::Kind kind) {
    switch (kind) {
        case Landscape::Kind::single_well: return "single_well";
        case Landscape::Kind::double_well: return "double_well";
        case Landscape::Kind::triple_well: return "triple_well";
        case Landscape::Kind::multi_well: return "multi_well";
    }
    return "unknown";
}

// ---------------------------------------------------------------- recursion

double RecursionConfig::jump_coefficient() const {
    if (epsilon) return *epsilon;
    return std::pow(eta, (alpha - 1.0) / alpha);
}

double RecursionConfig::noise_scale() const {
    if (!noise) return 0.0;
    return std::pow(eta, 1.0 / alpha) * jump_coefficient();
}

void RecursionConfig::validate(const Landscape& landscape) const {
    if (!(alpha >= 1.0 && alpha <= 2.0)) throw DomainError("recursion alpha must lie in [1, 2]");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("recursion eta must be non-negative");
    if (epsilon && !(*epsilon > 0.0 && std::isfinite(*epsilon))) throw DomainError("jump coefficient must be positive");
    if (eta * landscape.lipschitz_bound() > 2.0) {
        throw DomainError("step size " + std::to_string(eta) + " exceeds the stability limit 2/L = " +
                          std::to_string(2.0 / landscape.lipschitz_bound()));
    }
}

namespace {

// Allocation-free state for the Monte Carlo loops.
struct Iterate {
    std::array<double, 2> v{0.0, 0.0};
};

class Stepper {
public:
    Stepper(const Landscape& l, const RecursionConfig& c)
        : l_(l), eta_(c.eta), scale_(c.noise_scale()), spec_{c.alpha, 1.0}, noise_(c.noise && scale_ != 0.0) {}

    void advance(Iterate& th, SeededStream& stream) const {
        const double g0 = l_.principal_gradient(th.v[0]);
        const double s = noise_ ? scale_ * sample_stable(spec_, stream) : 0.0;
        if (l_.dim() == 1) {
            th.v[0] = std::clamp(th.v[0] + eta_ * g0 + s, l_.box_lower(), l_.box_upper());
            if (!std::isfinite(th.v[0])) throw NumericalError("recursion produced a non-finite iterate");
            return;
        }
        const auto& r = l_.direction();
        const double half = 0.5 * (l_.box_upper() - l_.box_lower());
        const double g1 = -l_.transverse_curvature() * th.v[1];
        th.v[0] = std::clamp(th.v[0] + eta_ * g0 + s * r[0], l_.box_lower(), l_.box_upper());
        th.v[1] = std::clamp(th.v[1] + eta_ * g1 + s * r[1], -half, half);
        if (!std::isfinite(th.v[0]) || !std::isfinite(th.v[1])) {
            throw NumericalError("recursion produced a non-finite iterate");
        }
    }

private:
    const Landscape& l_;
    double eta_;
    double scale_;
    StableSpec spec_;
    bool noise_;
};

double distance(const Iterate& th, std::span<const double> centre) {
    double sq = 0.0;
    for (std::size_t i = 0; i < centre.size(); ++i) sq += (th.v[i] - centre[i]) * (th.v[i] - centre[i]);
    return std::sqrt(sq);
}

Iterate at(std::span<const double> p) {
    Iterate th;
    for (std::size_t i = 0; i < p.size(); ++i) th.v[i] = p[i];
    return th;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

struct Level {
    double epsilon = 0.0;
    double mean = 0.0;
    double cv2 = 0.0;
    std::size_t n = 0;
};

std::vector<Level> group_levels(std::span<const ExitTimeRecord> records, CensoringPolicy policy,
                                std::size_t min_uncensored) {
    std::map<double, std::vector<double>> by_eps;
    std::map<double, std::size_t> uncensored;
    for (const auto& r : records) {
        auto& bucket = by_eps[r.epsilon];
        if (!r.censored) ++uncensored[r.epsilon];
        if (r.censored && policy == CensoringPolicy::exclude) continue;
        bucket.push_back(static_cast<double>(r.exit_step));
    }
    std::vector<Level> levels;
    for (const auto& [eps, values] : by_eps) {
        if (uncensored[eps] < min_uncensored) {
            throw DomainError("epsilon level " + std::to_string(eps) + " has " + std::to_string(uncensored[eps]) +
                              " uncensored runs, need " + std::to_string(min_uncensored));
        }
        Level lv;
        lv.epsilon = eps;
        lv.n = values.size();
        lv.mean = mean_of(values);
        double ss = 0.0;
        for (double v : values) ss += (v - lv.mean) * (v - lv.mean);
        const double var = values.size() > 1 ? ss / static_cast<double>(values.size() - 1) : 0.0;
        lv.cv2 = var / (lv.mean * lv.mean);
        if (!(lv.mean > 0.0)) throw DomainError("epsilon level has non-positive mean exit time");
        levels.push_back(lv);
    }
    if (levels.size() < 3) throw DomainError("scaling fit needs at least 3 epsilon levels, got " + std::to_string(levels.size()));
    return levels;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double sxx = 0.0;
    double residual_rms = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    double sw = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        mx += w[i] * x[i];
        my += w[i] * y[i];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
        syy += w[i] * (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("line fit needs at least two distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.sxx = sxx;
    double ssr = 0.0, plain = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += w[i] * r * r;
        plain += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    f.residual_rms = std::sqrt(plain / static_cast<double>(x.size()));
    return f;
}

}  // namespace

std::vector<double> levy_recursion_step(std::span<const double> theta, const Landscape& landscape,
                                        const RecursionConfig& config, SeededStream& stream) {
    config.validate(landscape);
    if (theta.size() != landscape.dim()) throw DomainError("recursion: iterate dimension mismatch");
    for (double v : theta) {
        if (!std::isfinite(v)) throw NumericalError("recursion: non-finite iterate");
    }
    Iterate th = at(theta);
    Stepper(landscape, config).advance(th, stream);
    return {th.v.begin(), th.v.begin() + static_cast<std::ptrdiff_t>(landscape.dim())};
}

ExitTimeStudy measure_exit_time(const Landscape& landscape, const ExitTimeConfig& config) {
    if (config.runs == 0) throw DomainError("exit time: runs must be at least 1");
    if (config.cap == 0) throw DomainError("exit time: cap must be at least 1");
    if (!(config.a > 0.0)) throw DomainError("exit time: radius a must be positive");
    const auto centre = landscape.maximum_point(config.well);
    const double tube = config.tube_halfwidth.value_or(config.a / 4.0);

    std::vector<std::optional<double>> eps_grid;
    if (config.epsilons.empty()) {
        eps_grid.emplace_back(std::nullopt);
    } else {
        for (double e : config.epsilons) eps_grid.emplace_back(e);
    }
    ExitTimeStudy study;
    study.records.resize(eps_grid.size() * config.runs);

    for (std::size_t c = 0; c < eps_grid.size(); ++c) {
        RecursionConfig rc{config.alpha, config.eta, eps_grid[c], true};
        rc.validate(landscape);
        const double eps = rc.jump_coefficient();
        const Stepper stepper(landscape, rc);
        detail::parallel_for(config.runs, config.workers, [&](std::size_t j) {
            SeededStream stream(config.seed, config.first_stream_id + c * config.runs + j);
            ExitTimeRecord rec;
            rec.alpha = config.alpha;
            rec.epsilon = eps;
            rec.a = config.a;
            rec.eta = config.eta;
            rec.run = j;
            Iterate th = at(centre);
            std::uint64_t k = 0;
            bool exited = false;
            try {
                while (k < config.cap) {
                    stepper.advance(th, stream);
                    ++k;
                    if (distance(th, centre) >= config.a) {
                        exited = true;
                        break;
                    }
                }
            } catch (const NumericalError&) {
                exited = false;
            }
            rec.exit_step = exited ? k : config.cap;
            rec.censored = !exited;
            if (exited) {
                const auto& r = landscape.direction();
                double along = 0.0;
                for (std::size_t i = 0; i < centre.size(); ++i) along += (th.v[i] - centre[i]) * r[i];
                rec.exit_sign = along >= 0.0 ? 1 : -1;
                double perp_sq = 0.0;
                for (std::size_t i = 0; i < centre.size(); ++i) {
                    const double d = th.v[i] - centre[i] - along * r[i];
                    perp_sq += d * d;
                }
                rec.tube = std::sqrt(perp_sq) < tube ? rec.exit_sign : 0;
            }
            study.records[c * config.runs + j] = rec;
        });

        ExitCellSummary cell;
        cell.alpha = config.alpha;
        cell.epsilon = eps;
        cell.runs = config.runs;
        std::vector<double> times;
        for (std::size_t j = 0; j < config.runs; ++j) {
            const auto& rec = study.records[c * config.runs + j];
            if (!rec.censored) times.push_back(static_cast<double>(rec.exit_step));
        }
        cell.uncensored = times.size();
        cell.censored_fraction = 1.0 - static_cast<double>(times.size()) / static_cast<double>(config.runs);
        cell.usable = cell.censored_fraction <= 0.05;
        cell.mean_exit = times.empty() ? std::nan("") : mean_of(times);
        cell.median_exit = median_of(times);
        study.cells.push_back(cell);
    }
    return study;
}

std::vector<std::vector<double>> replay_exit_path(const Landscape& landscape, std::size_t well, double a,
                                                  const RecursionConfig& recursion, std::uint64_t cap,
                                                  SeededStream stream) {
    recursion.validate(landscape);
    const auto centre = landscape.maximum_point(well);
    const Stepper stepper(landscape, recursion);
    std::vector<std::vector<double>> path{centre};
    Iterate th = at(centre);
    for (std::uint64_t k = 0; k < cap; ++k) {
        stepper.advance(th, stream);
        path.emplace_back(th.v.begin(), th.v.begin() + static_cast<std::ptrdiff_t>(landscape.dim()));
        if (distance(th, centre) >= a) break;
    }
    return path;
}

ScalingFit fit_scaling_exponent(std::span<const ExitTimeRecord> records, CensoringPolicy policy,
                                std::size_t min_uncensored) {
    const auto levels = group_levels(records, policy, min_uncensored);
    std::vector<double> x, y, w;
    const bool exact = std::any_of(levels.begin(), levels.end(), [](const Level& l) { return l.cv2 <= 0.0; });
    for (const auto& lv : levels) {
        x.push_back(std::log(1.0 / lv.epsilon));
        y.push_back(std::log(lv.mean));
        w.push_back(exact ? 1.0 : static_cast<double>(lv.n) / lv.cv2);
    }
    const auto f = weighted_line(x, y, w);
    ScalingFit out;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r2 = f.r2;
    out.levels = levels.size();
    if (exact) {
        // unit weights: residual-based standard error
        const double dof = static_cast<double>(x.size()) - 2.0;
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            ssr += r * r;
        }
        out.stderr_slope = dof > 0.0 ? std::sqrt(ssr / dof / f.sxx) : 0.0;
    } else {
        out.stderr_slope = std::sqrt(1.0 / f.sxx);
    }
    return out;
}

ExponentialLawFit fit_exponential_law(std::span<const ExitTimeRecord> records, CensoringPolicy policy,
                                      std::size_t min_uncensored) {
    const auto levels = group_levels(records, policy, min_uncensored);
    std::vector<double> xe, xp, y, w(levels.size(), 1.0);
    for (const auto& lv : levels) {
        xe.push_back(1.0 / (lv.epsilon * lv.epsilon));
        xp.push_back(std::log(1.0 / lv.epsilon));
        y.push_back(std::log(lv.mean));
    }
    const auto fe = weighted_line(xe, y, w);
    const auto fp = weighted_line(xp, y, w);
    ExponentialLawFit out;
    out.slope = fe.slope;
    out.intercept = fe.intercept;
    out.r2 = fe.r2;
    out.exponential_residual_rms = fe.residual_rms;
    out.power_law_residual_rms = fp.residual_rms;
    return out;
}

double transition_ratio(double d_plus, double d_minus, double alpha) {
    if (!(d_plus > 0.0) || !(d_minus < 0.0)) throw DomainError("transition ratio needs d+ > 0 and d- < 0");
    if (!(alpha > 0.0)) throw DomainError("transition ratio needs alpha > 0");
    const double right = std::pow(d_plus, -alpha);
    const double left = std::pow(-d_minus, -alpha);
    return right / (right + left);
}

TransitionStudy measure_transition(const Landscape& landscape, const TransitionConfig& config) {
    if (landscape.maxima().size() < 2) throw DomainError("transition needs a landscape with at least two wells");
    if (config.runs == 0) throw DomainError("transition: runs must be at least 1");
    if (!(config.a > 0.0)) throw DomainError("transition: radius a must be positive");
    const auto& maxima = landscape.maxima();
    for (std::size_t i = 0; i + 1 < maxima.size(); ++i) {
        if (maxima[i + 1] - maxima[i] <= 2.0 * config.a) throw DomainError("transition: neighbourhoods of radius a overlap");
    }
    RecursionConfig rc{config.alpha, config.eta, config.epsilon, true};
    rc.validate(landscape);
    const auto start = landscape.maximum_point(config.start_well);
    std::vector<std::vector<double>> centres;
    for (std::size_t j = 0; j < maxima.size(); ++j) centres.push_back(landscape.maximum_point(j));
    const Stepper stepper(landscape, rc);

    TransitionStudy study;
    study.records.resize(config.runs);
    detail::parallel_for(config.runs, config.workers, [&](std::size_t j) {
        SeededStream stream(config.seed, config.first_stream_id + j);
        TransitionRecord rec;
        rec.run = j;
        rec.start_well = config.start_well;
        Iterate th = at(start);
        std::uint64_t k = 0;
        try {
            while (k < config.cap && !rec.arrival_well) {
                stepper.advance(th, stream);
                ++k;
                for (std::size_t w = 0; w < centres.size(); ++w) {
                    if (w != config.start_well && distance(th, centres[w]) < config.a) {
                        rec.arrival_well = w;
                        break;
                    }
                }
            }
        } catch (const NumericalError&) {
        }
        rec.transition_step = rec.arrival_well ? k : config.cap;
        if (rec.arrival_well) rec.direction = *rec.arrival_well > config.start_well ? 1 : -1;
        study.records[j] = rec;
    });

    for (const auto& r : study.records) {
        if (r.direction > 0) ++study.right;
        else if (r.direction < 0) ++study.left;
        else ++study.censored;
    }
    const std::size_t arrived = study.right + study.left;
    study.right_probability = arrived ? static_cast<double>(study.right) / static_cast<double>(arrived) : std::nan("");
    study.censored_fraction = static_cast<double>(study.censored) / static_cast<double>(config.runs);
    if (config.start_well > 0 && config.start_well + 1 < maxima.size()) {
        study.theoretical_ratio = transition_ratio(landscape.d_plus(config.start_well, config.a),
                                                   landscape.d_minus(config.start_well, config.a), config.alpha);
    } else {
        study.theoretical_ratio = config.start_well == 0 ? 1.0 : 0.0;
    }
    return study;
}

}  // namespace hpg
