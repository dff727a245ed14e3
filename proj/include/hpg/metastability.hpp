/**
 * @file metastability.hpp
 * @brief Levy-driven gradient-ascent recursion on synthetic multi-well
 *        objectives, exit-time and transition Monte Carlo, and scaling fits.
 *
 * The recursion is
 *
 *     theta_{k+1} = theta_k + eta grad J(theta_k) + eta^(1/alpha) eps S_k,
 *
 * with S_k ~ SaS(1). When eps is not overridden it is eta^((alpha-1)/alpha)
 * and the noise term reduces to eta S_k. In two dimensions the noise acts
 * along one fixed unit direction r.
 *
 * Landscapes are polynomial in the principal coordinate (plus a concave
 * quadratic in the transverse coordinate for d = 2), so maxima, minima and
 * inter-well distances are exact. The iterate is clamped to a simulation box
 * on which grad J is Lipschitz; the recursion rejects step sizes above the
 * Euler stability limit 2 / L.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpg/stable_random.hpp"

namespace hpg {

/// Dense polynomial, coefficients in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients);

    /// prod_i (x - roots[i])
    static Polynomial from_roots(std::span<const double> roots);

    double operator()(double x) const;
    Polynomial derivative() const;
    /// Antiderivative with zero constant term.
    Polynomial antiderivative() const;
    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator*(double scalar) const;

    const std::vector<double>& coefficients() const { return c_; }

private:
    std::vector<double> c_;
};

class Landscape {
public:
    enum class Kind { single_well, double_well, triple_well, multi_well };

    /// J = -curvature theta^2 / 2, one maximum at 0.
    static Landscape single_well(double curvature, double box_margin = 1.0);
    /// J = -depth ((theta - m1)(theta - m2) / h^2)^2 with h = (m2 - m1) / 2:
    /// maxima m1 < m2 with J = 0, barrier J = -depth at the midpoint.
    static Landscape double_well(double m1, double m2, double depth, double box_margin = 0.5);
    /// J' = -scale prod_i (theta - z_i) for sorted critical points z_0 < ... < z_{2r-2};
    /// even-indexed points are maxima, odd-indexed points minima.
    static Landscape multi_well(std::vector<double> critical_points, double scale = 1.0, double box_margin = 0.5);
    /// Preset triple wells for neighbourhood radius 0.25:
    ///   symmetric   critical points {-2.25, -1, 0, 1, 2.25}
    ///   asymmetric  critical points {-2.25, -1, 0, 0.5, 1.25}, so that from the
    ///               middle maximum d+ = 1 and d- = -2 (and basin boundaries sit at +0.5 / -1).
    static Landscape triple_well(bool symmetric, double scale = 1.0);

    /// Adds a transverse coordinate with J += -transverse_curvature theta_2^2 / 2
    /// and sets the noise direction (normalised). Default direction is e_1.
    Landscape with_second_dimension(double transverse_curvature, std::vector<double> direction = {1.0, 0.0}) const;

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }

    double value(std::span<const double> theta) const;
    std::vector<double> gradient(std::span<const double> theta) const;
    /// dJ/dtheta_1 along the principal axis (allocation-free).
    double principal_gradient(double x) const { return grad_poly_(x); }
    double transverse_curvature() const { return transverse_curvature_; }

    /// Principal-axis positions of the local maxima / minima, ascending.
    const std::vector<double>& maxima() const { return maxima_; }
    const std::vector<double>& minima() const { return minima_; }
    std::vector<double> maximum_point(std::size_t well) const;

    double box_lower() const { return box_lo_; }
    double box_upper() const { return box_hi_; }
    const std::vector<double>& direction() const { return direction_; }

    /// Upper bound on the Lipschitz constant of grad J over the box.
    double lipschitz_bound() const { return lipschitz_; }

    /// Signed distances from maximum `well` along +r / -r to the boundary of the
    /// radius-a neighbourhood of the next / previous maximum.
    double d_plus(std::size_t well, double a) const;
    double d_minus(std::size_t well, double a) const;
    /// Distances from maximum `well` to the neighbouring minima (basin boundaries).
    double basin_right(std::size_t well) const;
    double basin_left(std::size_t well) const;

    /// Clamps the principal coordinate to the box (transverse coordinate to +-box half-width).
    void clamp(std::vector<double>& theta) const;

private:
    void finalise(double box_margin);

    Kind kind_ = Kind::single_well;
    std::size_t dim_ = 1;
    Polynomial value_poly_;
    Polynomial grad_poly_;
    double transverse_curvature_ = 0.0;
    std::vector<double> direction_{1.0};
    std::vector<double> maxima_;
    std::vector<double> minima_;
    double box_lo_ = -1.0;
    double box_hi_ = 1.0;
    double lipschitz_ = 0.0;
};

std::string to_string(Landscape::Kind kind);

struct RecursionConfig {
    double alpha = 2.0;
    double eta = 0.01;
    std::optional<double> epsilon;  ///< jump coefficient override
    bool noise = true;

    /// eps, defaulting to eta^((alpha-1)/alpha).
    double jump_coefficient() const;
    /// eta^(1/alpha) * eps, the multiplier of the unit SaS draw.
    double noise_scale() const;
    void validate(const Landscape& landscape) const;
};

std::vector<double> levy_recursion_step(std::span<const double> theta, const Landscape& landscape,
                                        const RecursionConfig& config, SeededStream& stream);

struct ExitTimeRecord {
    double alpha = 0.0;
    double epsilon = 0.0;
    double a = 0.0;
    double eta = 0.0;
    std::size_t run = 0;
    std::uint64_t exit_step = 0;  ///< equals the cap when censored
    bool censored = false;
    int exit_sign = 0;  ///< sign of <theta - theta_bar, r> at exit
    int tube = 0;       ///< +1 / -1 when the exit point lies in the Omega+ / Omega- tube, else 0
};

struct ExitCellSummary {
    double alpha = 0.0;
    double epsilon = 0.0;
    std::size_t runs = 0;
    std::size_t uncensored = 0;
    double mean_exit = 0.0;    ///< over uncensored runs
    double median_exit = 0.0;  ///< over uncensored runs
    double censored_fraction = 0.0;
    bool usable = true;  ///< censored fraction <= 5%
};

struct ExitTimeStudy {
    std::vector<ExitTimeRecord> records;
    std::vector<ExitCellSummary> cells;
};

struct ExitTimeConfig {
    std::size_t well = 0;
    double alpha = 1.5;
    double eta = 0.01;
    std::vector<double> epsilons;  ///< empty: a single cell at eps = eta^((alpha-1)/alpha)
    double a = 0.5;
    std::size_t runs = 500;
    std::uint64_t cap = 10'000'000;
    std::optional<double> tube_halfwidth;  ///< default a / 4
    std::uint64_t seed = 0;
    std::uint64_t first_stream_id = 0;  ///< run j of cell c uses stream first_stream_id + c * runs + j
    unsigned workers = 1;
};

ExitTimeStudy measure_exit_time(const Landscape& landscape, const ExitTimeConfig& config);

/// Replays one exit-time run and returns every iterate from the start until
/// (and including) the first one outside the ball, or until `cap` steps.
std::vector<std::vector<double>> replay_exit_path(const Landscape& landscape, std::size_t well, double a,
                                                  const RecursionConfig& recursion, std::uint64_t cap,
                                                  SeededStream stream);

enum class CensoringPolicy { exclude, at_cap };

struct ScalingFit {
    double slope = 0.0;  ///< d log E[tau] / d log(1/eps)
    double stderr_slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t levels = 0;
};

/// Weighted least squares of log mean exit time against log(1/eps), weights
/// n / CV^2 (inverse delta-method variance of the log mean). Needs >= 3 eps
/// levels with >= min_uncensored uncensored runs each.
ScalingFit fit_scaling_exponent(std::span<const ExitTimeRecord> records, CensoringPolicy policy,
                                std::size_t min_uncensored = 200);

/// Ordinary least squares of log mean exit time against eps^-2 (the Brownian law).
/// The power-law fit residual RMS is returned for comparison.
struct ExponentialLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double power_law_residual_rms = 0.0;
    double exponential_residual_rms = 0.0;
};
ExponentialLawFit fit_exponential_law(std::span<const ExitTimeRecord> records, CensoringPolicy policy,
                                      std::size_t min_uncensored = 200);

struct TransitionRecord {
    std::size_t run = 0;
    std::size_t start_well = 0;
    std::optional<std::size_t> arrival_well;  ///< empty when censored
    std::uint64_t transition_step = 0;
    int direction = 0;  ///< +1 towards higher well index, -1 lower, 0 censored
};

struct TransitionStudy {
    std::vector<TransitionRecord> records;
    std::size_t right = 0;
    std::size_t left = 0;
    std::size_t censored = 0;
    double right_probability = 0.0;  ///< right / (right + left)
    double theoretical_ratio = 0.0;  ///< d+^-alpha / (d+^-alpha + (-d-)^-alpha)
    double censored_fraction = 0.0;
};

struct TransitionConfig {
    std::size_t start_well = 1;
    double alpha = 1.0;
    double eta = 0.01;
    std::optional<double> epsilon;
    double a = 0.25;
    std::size_t runs = 2000;
    std::uint64_t cap = 10'000'000;
    std::uint64_t seed = 0;
    std::uint64_t first_stream_id = 0;
    unsigned workers = 1;
};

TransitionStudy measure_transition(const Landscape& landscape, const TransitionConfig& config);

/// (d+)^-alpha / ((d+)^-alpha + (-d-)^-alpha)
double transition_ratio(double d_plus, double d_minus, double alpha);

}  // namespace hpg
