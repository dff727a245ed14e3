/**
 * @file policies.hpp
 * @brief Linear-feature policy families over a scalar action.
 *
 * Parameters are theta = [x, y]: x weights the feature vector to give the
 * location phi(s)^T x, y is a log-scale.
 *
 *   gaussian        N(a | phi^T x, e^y)            (e^y is the variance)
 *   exp_power(al)   exp(-|a - phi^T x|^al / s^al) / (s A_al),  s = e^y
 *   cauchy          1 / (e^y pi (1 + ((a - phi^T x) / e^y)^2))
 *
 * with A_al = int exp(-|x|^al) dx. The scale is kept above delta0 by clamping
 * y >= log(delta0). Actions are emitted unclipped; the environment clips.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hpg/stable_random.hpp"

namespace hpg {

enum class Family { gaussian, exp_power, cauchy };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

struct PolicyKind {
    Family family = Family::gaussian;
    double alpha = 2.0;  ///< tail index, used only by exp_power, in [1, 2]
    bool variable_scale = true;

    void validate() const;
};

class FeatureMap {
public:
    enum class Kind { identity, polynomial, radial_basis };

    static FeatureMap identity();
    /// [1, s, s^2, ..., s^degree]
    static FeatureMap polynomial(int degree);
    static FeatureMap radial_basis(std::vector<double> centers, double width);

    Kind kind() const { return kind_; }
    int degree() const { return degree_; }
    const std::vector<double>& centers() const { return centers_; }
    double width() const { return width_; }

    std::size_t dim() const;
    std::vector<double> operator()(double state) const;

    /// sup of ||phi(s)|| over [lo, hi], by dense evaluation including endpoints.
    double bound(double lo, double hi) const;

private:
    Kind kind_ = Kind::identity;
    int degree_ = 1;
    std::vector<double> centers_;
    double width_ = 1.0;
};

struct PolicyParams {
    std::vector<double> x;
    double y = 0.0;

    std::size_t dim() const { return x.size() + 1; }
    /// Enforces e^y >= delta0.
    void clamp_scale(double delta0);
    /// [x..., y]
    std::vector<double> flatten() const;
};

inline constexpr double kDefaultScaleFloor = 1e-3;

/// A_alpha = int exp(-|x|^alpha) dx, adaptive quadrature, cached per alpha.
double exp_power_normalizer(double alpha);
/// B_alpha = int |a|^(alpha-1) exp(-|a|^alpha / 2) da, adaptive quadrature, cached per alpha.
double exp_power_tail_moment(double alpha);
/// sup_z (1 + z^2) exp(-|z|^alpha), the Cauchy-proposal envelope constant (times pi / A_alpha).
double exp_power_envelope(double alpha);

class Policy {
public:
    Policy(PolicyKind kind, FeatureMap features, double delta0 = kDefaultScaleFloor);

    const PolicyKind& kind() const { return kind_; }
    const FeatureMap& features() const { return features_; }
    double delta0() const { return delta0_; }
    std::size_t param_dim() const { return features_.dim() + 1; }

    std::vector<double> featurize(double state) const { return features_(state); }

    /// phi^T x: the mean (gaussian) or mode (exp_power, cauchy).
    double location(const PolicyParams& params, std::span<const double> phi) const;

    double log_density(const PolicyParams& params, std::span<const double> phi, double action) const;
    double density(const PolicyParams& params, std::span<const double> phi, double action) const;

    /// Gradient of log_density in [x, y]. The y-component is returned even when
    /// the scale is frozen; the trainer masks it.
    std::vector<double> score(const PolicyParams& params, std::span<const double> phi, double action) const;

    double sample_action(const PolicyParams& params, std::span<const double> phi, SeededStream& stream) const;

    /// Standard deviation for gaussian, e^y otherwise.
    double scale(const PolicyParams& params) const;

    PolicyParams initial_params(std::vector<double> x, double y) const;

private:
    void check_inputs(const PolicyParams& params, std::span<const double> phi, double action) const;

    PolicyKind kind_;
    FeatureMap features_;
    double delta0_;
};

/// Upper bound B(lambda) on the score norm over the high-probability action set
/// of the exp_power family (gaussian is alpha = 2):
///   (D_phi / sigma) (D_Theta D_phi / sigma + 2 log(D_phi B_alpha / (sigma A_alpha lambda)))^((alpha-1)/alpha)
/// The logarithm is floored at zero: once lambda exceeds the total tail mass
/// the action set may be empty.
double exploration_tolerance_bound(double alpha, double sigma, double lambda, double d_phi, double d_theta);

/// The Cauchy score is bounded on the whole action space, so lambda = 0 is
/// admissible and B(0) = max(D_phi / sigma, 1).
double cauchy_score_bound(double sigma, double d_phi);

/// Dispatches on family: cauchy ignores lambda and alpha, gaussian uses alpha = 2.
double exploration_tolerance_bound(const PolicyKind& kind, double sigma, double lambda, double d_phi,
                                   double d_theta);

}  // namespace hpg
