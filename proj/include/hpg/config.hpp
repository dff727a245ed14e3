/**
 * @file config.hpp
 * @brief Experiment configuration: JSON parse / serialize with field-level errors.
 *
 * Every field has a default except `kind`, `train.gamma` (for experiments
 * that train) and `metastability.landscape.kind` (for exit-time and
 * transition experiments). Unknown keys are rejected by name so typos do not
 * silently fall back to defaults.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpg/environments.hpp"
#include "hpg/metastability.hpp"
#include "hpg/policies.hpp"
#include "hpg/trainer.hpp"

namespace hpg {

/// Invalid configuration; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class ExperimentKind { train, tail_trace, exit_time, transition, occupancy };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);
bool trains_policy(ExperimentKind kind);

struct EnvBlock {
    std::string name = "pmc";  ///< pmc | mario
    double dt = 0.05;
    double goal_tolerance = 0.05;
    std::size_t horizon_cap = 500;
    double init = 2.26;
    std::optional<double> action_limit;  ///< environment default when unset

    bool operator==(const EnvBlock&) const = default;
};

struct FeatureBlock {
    std::string kind = "polynomial";  ///< identity | polynomial | radial_basis
    int degree = 1;
    std::vector<double> centers;
    double width = 1.0;

    bool operator==(const FeatureBlock&) const = default;
};

struct PolicyBlock {
    Family family = Family::gaussian;
    double alpha = 2.0;
    bool variable_scale = true;
    FeatureBlock features{};
    std::vector<double> initial_x;  ///< zeros when empty
    std::optional<double> initial_y;
    /// Convenience: sets initial_y to log sigma (Cauchy, exp_power) or log sigma^2 (Gaussian).
    std::optional<double> sigma;
    double delta0 = kDefaultScaleFloor;

    bool operator==(const PolicyBlock&) const = default;
};

struct ScheduleBlock {
    StepSchedule::Kind kind = StepSchedule::Kind::geometric_decay;
    double eta = 0.005;
    double beta = 1.0;
    double eta0 = 0.005;
    double eta_min = 5e-9;

    bool operator==(const ScheduleBlock&) const = default;
};

struct TrainBlock {
    double gamma = 0.97;
    std::size_t episodes = 1000;
    std::size_t batch = 5;
    ScheduleBlock schedule{};
    std::size_t eval_window = 100;
    std::optional<double> grad_clip;

    bool operator==(const TrainBlock&) const = default;
};

struct LandscapeBlock {
    std::string kind = "double_well";  ///< single_well | double_well | triple_well | multi_well
    double curvature = 1.0;
    double m1 = -1.0;
    double m2 = 1.0;
    double depth = 1.0;
    bool symmetric = true;
    std::vector<double> critical_points;
    double scale = 1.0;
    std::optional<double> box_margin;
    std::optional<double> transverse_curvature;  ///< set: two-dimensional landscape
    std::vector<double> direction{1.0, 0.0};

    bool operator==(const LandscapeBlock&) const = default;
};

struct MetastabilityBlock {
    LandscapeBlock landscape{};
    std::vector<double> alphas{1.5};
    double eta = 0.01;
    std::vector<double> epsilons;  ///< exit time: eps grid (empty: eps from eta)
    std::optional<double> epsilon; ///< transition: jump coefficient override
    /// Ball radius; one value for all alphas or one per alpha.
    std::vector<double> a{0.5};
    std::size_t runs = 500;
    std::uint64_t cap = 10'000'000;
    std::size_t well = 0;        ///< exit time: well index
    std::size_t start_well = 1;  ///< transition: start well
    std::optional<double> tube_halfwidth;

    bool operator==(const MetastabilityBlock&) const = default;
};

struct TailBlock {
    std::size_t window = 50;

    bool operator==(const TailBlock&) const = default;
};

struct OccupancyBlock {
    std::size_t bins = 100;
    std::size_t eval_episodes = 100;

    bool operator==(const OccupancyBlock&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::train;
    EnvBlock env{};
    PolicyBlock policy{};
    TrainBlock train{};
    MetastabilityBlock metastability{};
    TailBlock tail{};
    OccupancyBlock occupancy{};
    std::vector<std::uint64_t> seeds{0};
    std::string output_dir = "runs/experiment";
    unsigned workers = 1;

    bool operator==(const ExperimentConfig&) const = default;

    /// Cross-field checks (value ranges, list lengths); throws ConfigError.
    void validate() const;
};

/// `implied_kind` comes from a subcommand; it fills a missing `kind` and must
/// agree with a present one.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<ExperimentKind> implied_kind = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> implied_kind = std::nullopt);
nlohmann::json serialize_config(const ExperimentConfig& config);

// Builders from config blocks.
std::unique_ptr<Environment> make_environment(const EnvBlock& block);
Policy make_policy(const PolicyBlock& block);
PolicyParams make_initial_params(const PolicyBlock& block, const Policy& policy);
TrainConfig make_train_config(const TrainBlock& block, std::uint64_t seed);
Landscape make_landscape(const LandscapeBlock& block);

}  // namespace hpg
