#pragma once

// Scenario description loaded from a JSON file with sections
// scenario / plant / reward / ensemble / controller / noise / run.
// Unknown keys are rejected so that typos fail loudly.

#include "dcee/dual.hpp"
#include "dcee/pv.hpp"
#include "dcee/reward.hpp"
#include "dcee/types.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcee {

enum class ScenarioKind { QuadraticLinear, Mppt };
enum class Algo { Dcee, Hc, Ic };

[[nodiscard]] std::string_view to_string(ScenarioKind kind);
[[nodiscard]] std::string_view to_string(Algo algo);
Algo parse_algo(std::string_view name);

struct LinearPlantSpec {
    Mat A, B, C;
    Vec x0;
    std::vector<std::complex<double>> poles; // used when K is absent
    std::optional<Mat> K;
};

struct QuadraticSpec {
    double linear_coeff = 2.0;
    Vec theta_true = scalar_vec(1.0);
    double y_lo = -3.0;
    double y_hi = 3.0;
    double theta_floor = 1e-6;
};

struct MpptPlantSpec {
    PvParams pv;
    EnvProfile profile = default_profile();
    double v_min = 0.0; // actuator limits shared by every algorithm
    double v_max = 48.0;
    double v0 = 30.0;
};

enum class PriorKind {
    Box,        // explicit prior_low / prior_high
    Nominal,    // nominal fit +/- prior_width * max(|coeff|, prior_floor)
    Conditions, // fits at conditions drawn uniformly from the given ranges
};

struct EnsembleSpec {
    std::size_t size = 100;
    PriorKind prior = PriorKind::Box;
    Vec prior_low;
    Vec prior_high;
    double rate = 0.005;
    // When set, member rates are spaced geometrically over this range instead.
    std::optional<std::pair<double, double>> rate_range;
    double prior_width = 0.3;
    double prior_floor = 10.0;
    double nominal_irradiance = kRefIrradiance;
    double nominal_temperature = kRefTemperature;
    double fit_from = 15.0;
    double fit_to = 43.0;
    std::pair<double, double> irradiance_range{200.0, 1000.0};
    std::pair<double, double> temperature_range{15.0, 45.0};
};

struct ControllerSpec {
    Algo algo = Algo::Dcee;
    double delta = 0.5;
    double fd_eps = 1e-5;
    ExploreGradient gradient = ExploreGradient::FiniteDifference;
    std::optional<Vec> xi0; // defaults to C x0
    double hc_step = 0.5;
    double ic_step = 0.1;
    double ic_deadband = 1e-3;
};

struct RunSpec {
    std::int64_t steps = 5000;
    double dt = 1.0; // seconds per step; MPPT default 1 ms
    std::uint64_t seed = 1;
    std::string out;
    int oracle_grid = 2000;
    // Constant-conditions segment used for steady-state band comparisons.
    std::optional<std::pair<double, double>> band_window;
};

struct ScenarioConfig {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::QuadraticLinear;
    LinearPlantSpec linear;
    QuadraticSpec quadratic;
    MpptPlantSpec mppt;
    PvRewardSpec pv_reward;
    EnsembleSpec ensemble;
    ControllerSpec controller;
    NoiseSpec noise;
    RunSpec run;
    // Algorithms requested for `compare`; empty for a single run.
    std::vector<Algo> compare_algos;
};

// The reference linear example: A = [[0,1],[2,1]], B = [1;1], C = [0,1],
// J = 2y - theta y^2 with theta = 1.
ScenarioConfig example_linear_config(double noise_variance = 2.0);
ScenarioConfig default_mppt_config(Algo algo = Algo::Dcee);

// JSON text; errors carry the offending key path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
void validate(const ScenarioConfig& cfg);

// Checks that plant, profile and horizon agree across a set of configs.
void check_shared_sections(const std::vector<ScenarioConfig>& configs);

} // namespace dcee
