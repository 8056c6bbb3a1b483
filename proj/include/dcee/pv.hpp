#pragma once

// Single-diode photovoltaic module used as ground truth for MPPT runs, its
// environment profile, and the polynomial P-V reward the estimators fit.

#include "dcee/reward.hpp"

#include <utility>
#include <vector>

namespace dcee {

inline constexpr double kRefIrradiance = 1000.0; // W/m^2
inline constexpr double kRefTemperature = 25.0;  // deg C

struct PvParams {
    double i_sc_ref = 5.6;      // A
    double v_oc_ref = 44.0;     // V
    int n_cells = 72;
    double ideality = 1.5;
    double r_s = 0.5;           // ohm
    double r_sh = 300.0;        // ohm; infinity allowed
    double temp_coeff_i = 0.0025; // A/degC
    double temp_coeff_v = -0.16;  // V/degC
};

void validate(const PvParams& params);

struct PvCurrent {
    double current = 0.0;
    bool out_of_range = false; // v < 0 or v beyond the open-circuit voltage
};

PvCurrent pv_current(const PvParams& params, double v, double irradiance, double temperature);
double pv_power(const PvParams& params, double v, double irradiance, double temperature);
double open_circuit_voltage(const PvParams& params, double irradiance, double temperature);

struct MppPoint {
    double v_star = 0.0;
    double p_star = 0.0;
};

MppPoint mpp_oracle(const PvParams& params, double irradiance, double temperature, int grid_points = 2000);

// Irradiance is piecewise linear through (t, G) knots; a repeated time encodes
// a step and evaluation there takes the later value. Temperature holds each
// (t_start, T) value until the next start.
struct EnvProfile {
    std::vector<std::pair<double, double>> irradiance;
    std::vector<std::pair<double, double>> temperature;
};

struct EnvSample {
    double irradiance = 0.0;
    double temperature = 0.0;
};

void validate(const EnvProfile& profile);
EnvSample profile_eval(const EnvProfile& profile, double t);

// Two ramps up, a ramp down, a step and a final ramp over two seconds;
// temperature goes from 25 to 35 degC at t = 1 s.
EnvProfile default_profile();
EnvProfile constant_profile(double irradiance, double temperature);

// phi(V) = [1, s, ..., s^n] with s = (V - center) / scale. The default
// s = V / 44 is the plain monomial regressor in units of the open-circuit voltage.
struct PolyBasis {
    int degree = 5;
    double center = 0.0;
    double scale = 44.0;

    [[nodiscard]] Vec eval(double v) const;
    [[nodiscard]] Vec derivative(double v) const;
    [[nodiscard]] Vec second_derivative(double v) const;
};

void validate(const PolyBasis& basis);

struct PvRewardSpec {
    PolyBasis basis;
    double v_lo = 0.0;   // admissible operating range
    double v_hi = 48.0;
    double r_lo = 20.0;  // search interval for the optimum map
    double r_hi = 44.0;
};

// J(theta, V) = phi(V)^T theta; l(theta) is the maximiser of the polynomial
// over [r_lo, r_hi].
RewardModel pv_poly_reward(const PvRewardSpec& spec);

// Least-squares fit of the true P-V curve at fixed conditions on n_points
// evenly spaced voltages in [v_from, v_to].
Vec fit_poly(const PvParams& params, const PolyBasis& basis, double irradiance, double temperature, double v_from,
             double v_to, int n_points = 200);

// Relative RMS fit error over the same kind of grid.
double poly_fit_error(const PvParams& params, const PolyBasis& basis, const Vec& coeffs, double irradiance,
                      double temperature, double v_from, double v_to, int n_points = 400);

} // namespace dcee
