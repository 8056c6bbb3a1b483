#include "dcee/pv.hpp"

#include "dcee/error.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace dcee {
namespace {

constexpr double kBoltzmann = 1.380649e-23;
constexpr double kCharge = 1.602176634e-19;
constexpr double kKelvin = 273.15;

struct Operating {
    double i_ph;
    double i_0;
    double a;     // modified ideality factor n * Ns * k T / q
    double g_sh;  // 1 / R_sh, zero for an ideal shunt
    double r_s;
};

Operating operating_point(const PvParams& p, double irradiance, double temperature) {
    const double dT = temperature - kRefTemperature;
    const double a = p.ideality * p.n_cells * kBoltzmann * (temperature + kKelvin) / kCharge;
    const bool ideal_shunt = std::isinf(p.r_sh);
    const double g_sh = ideal_shunt ? 0.0 : 1.0 / p.r_sh;
    const double ratio = ideal_shunt ? 1.0 : (p.r_sh + p.r_s) / p.r_sh;
    const double i_sc = p.i_sc_ref + p.temp_coeff_i * dT;
    const double v_oc = p.v_oc_ref + p.temp_coeff_v * dT;
    if (!(i_sc > 0.0) || !(v_oc > 0.0)) {
        throw DomainError("temperature outside the range where the module model is defined");
    }
    Operating op;
    op.i_ph = i_sc * (irradiance / kRefIrradiance) * ratio;
    op.i_0 = (i_sc * ratio - v_oc * g_sh) / std::expm1(v_oc / a);
    op.a = a;
    op.g_sh = g_sh;
    op.r_s = p.r_s;
    if (!(op.i_0 > 0.0) || !std::isfinite(op.i_0)) {
        throw DomainError("module parameters give a non-positive diode saturation current");
    }
    return op;
}

void check_env(double irradiance, double temperature) {
    if (!(irradiance >= 0.0) || !std::isfinite(irradiance) || !std::isfinite(temperature)) {
        throw ValidationError("irradiance must be finite and nonnegative, temperature finite");
    }
}

auto bracket_tol() {
    return [](double lo, double hi) { return hi - lo <= 1e-13 * std::max(1.0, std::abs(lo)); };
}

double poly_value(const PolyBasis& basis, const double* theta, std::size_t stride, double v) {
    const double s = (v - basis.center) / basis.scale;
    double acc = 0.0;
    for (int j = basis.degree; j >= 0; --j) {
        acc = acc * s + theta[std::size_t(j) * stride];
    }
    return acc;
}

double poly_slope(const PolyBasis& basis, const double* theta, std::size_t stride, double v) {
    const double s = (v - basis.center) / basis.scale;
    double acc = 0.0;
    for (int j = basis.degree; j >= 1; --j) {
        acc = acc * s + j * theta[std::size_t(j) * stride];
    }
    return acc / basis.scale;
}

// Maximiser of the polynomial over [lo, hi]: coarse grid, then a sign change
// of the slope around the best knot.
double poly_argmax(const PolyBasis& basis, const double* theta, std::size_t stride, double lo, double hi) {
    constexpr int kSeeds = 64;
    const double h = (hi - lo) / kSeeds;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kSeeds; ++i) {
        const double val = poly_value(basis, theta, stride, lo + i * h);
        if (val > best_val) {
            best_val = val;
            best = i;
        }
    }
    const auto knot = [&](int i) { return i == kSeeds ? hi : lo + i * h; };
    const auto slope = [&](double v) { return poly_slope(basis, theta, stride, v); };

    const double at = knot(best);
    const double d_at = slope(at);
    if (d_at == 0.0) {
        return at;
    }
    double a = at;
    double b = at;
    if (d_at > 0.0 && best < kSeeds) {
        b = knot(best + 1);
    } else if (d_at < 0.0 && best > 0) {
        a = knot(best - 1);
    } else {
        return at; // boundary maximum
    }
    if (!(slope(a) > 0.0 && slope(b) < 0.0)) {
        return at; // no interior stationary point next to the best knot
    }
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(slope, a, b, bracket_tol(), iters);
    const double cand = 0.5 * (root.first + root.second);
    return poly_value(basis, theta, stride, cand) >= best_val ? cand : at;
}

} // namespace

void validate(const PvParams& p) {
    if (!(p.i_sc_ref > 0.0) || !(p.v_oc_ref > 0.0)) {
        throw ValidationError("PV short-circuit current and open-circuit voltage must be positive");
    }
    if (p.n_cells < 1 || !(p.ideality > 0.0)) {
        throw ValidationError("PV cell count and ideality factor must be positive");
    }
    if (!(p.r_s >= 0.0) || !(p.r_sh > 0.0)) {
        throw ValidationError("PV resistances must be nonnegative (shunt strictly positive)");
    }
    if (!std::isfinite(p.temp_coeff_i) || !std::isfinite(p.temp_coeff_v)) {
        throw ValidationError("PV temperature coefficients must be finite");
    }
}

PvCurrent pv_current(const PvParams& params, double v, double irradiance, double temperature) {
    check_env(irradiance, temperature);
    if (!std::isfinite(v)) {
        throw ValidationError("PV terminal voltage must be finite");
    }
    if (v < 0.0) {
        return {0.0, true};
    }
    const Operating op = operating_point(params, irradiance, temperature);
    const auto f = [&](double i) {
        const double vd = v + i * op.r_s;
        return op.i_ph - op.i_0 * std::expm1(vd / op.a) - vd * op.g_sh - i;
    };
    const double f0 = f(0.0);
    if (f0 <= 0.0) {
        return {0.0, f0 < 0.0};
    }
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(f, 0.0, op.i_ph, f0, f(op.i_ph), bracket_tol(), iters);
    return {0.5 * (root.first + root.second), false};
}

double pv_power(const PvParams& params, double v, double irradiance, double temperature) {
    return v * pv_current(params, v, irradiance, temperature).current;
}

double open_circuit_voltage(const PvParams& params, double irradiance, double temperature) {
    check_env(irradiance, temperature);
    const Operating op = operating_point(params, irradiance, temperature);
    if (op.i_ph == 0.0) {
        return 0.0;
    }
    const auto g = [&](double v) { return op.i_ph - op.i_0 * std::expm1(v / op.a) - v * op.g_sh; };
    const double hi = op.a * std::log1p(op.i_ph / op.i_0);
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(g, 0.0, hi, bracket_tol(), iters);
    return 0.5 * (root.first + root.second);
}

MppPoint mpp_oracle(const PvParams& params, double irradiance, double temperature, int grid_points) {
    if (grid_points < 1000) {
        throw ValidationError("mpp_oracle needs at least 1000 grid points");
    }
    const double voc = open_circuit_voltage(params, irradiance, temperature);
    if (!(voc > 0.0)) {
        return {0.0, 0.0};
    }
    const double h = voc / grid_points;
    int best = 0;
    double best_p = -1.0;
    for (int i = 0; i <= grid_points; ++i) {
        const double p = pv_power(params, i * h, irradiance, temperature);
        if (p > best_p) {
            best_p = p;
            best = i;
        }
    }
    const double lo = std::max(0, best - 1) * h;
    const double hi = std::min(grid_points, best + 1) * h;
    std::uintmax_t iters = 200;
    const auto neg = [&](double v) { return -pv_power(params, v, irradiance, temperature); };
    const auto res = boost::math::tools::brent_find_minima(neg, lo, hi, std::numeric_limits<double>::digits, iters);
    if (-res.second >= best_p) {
        return {res.first, -res.second};
    }
    return {best * h, best_p};
}

void validate(const EnvProfile& profile) {
    if (profile.irradiance.empty() || profile.temperature.empty()) {
        throw ValidationError("environment profile needs at least one irradiance and one temperature knot");
    }
    const auto check_series = [](const auto& series, const char* what) {
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (!std::isfinite(series[i].first) || !std::isfinite(series[i].second) || series[i].first < 0.0) {
                throw ValidationError(std::string(what) + " knots must be finite with t >= 0");
            }
            if (i > 0 && series[i].first < series[i - 1].first) {
                throw ValidationError(std::string(what) + " knot times must be nondecreasing");
            }
        }
    };
    check_series(profile.irradiance, "irradiance");
    check_series(profile.temperature, "temperature");
    for (const auto& [t, g] : profile.irradiance) {
        if (g < 0.0) {
            throw ValidationError("irradiance must be nonnegative");
        }
    }
    for (std::size_t i = 2; i < profile.irradiance.size(); ++i) {
        if (profile.irradiance[i].first == profile.irradiance[i - 2].first) {
            throw ValidationError("at most two irradiance knots may share a time");
        }
    }
}

EnvSample profile_eval(const EnvProfile& profile, double t) {
    if (!(t >= 0.0)) {
        throw ValidationError("profile time must be nonnegative");
    }
    EnvSample out;
    const auto& g = profile.irradiance;
    const auto after = std::upper_bound(g.begin(), g.end(), t, [](double x, const auto& k) { return x < k.first; });
    if (after == g.begin()) {
        out.irradiance = g.front().second;
    } else if (after == g.end()) {
        out.irradiance = g.back().second;
    } else {
        const auto& k0 = *(after - 1);
        const auto& k1 = *after;
        const double w = (t - k0.first) / (k1.first - k0.first);
        out.irradiance = k0.second + w * (k1.second - k0.second);
    }
    const auto& temp = profile.temperature;
    const auto t_after =
        std::upper_bound(temp.begin(), temp.end(), t, [](double x, const auto& k) { return x < k.first; });
    out.temperature = t_after == temp.begin() ? temp.front().second : (t_after - 1)->second;
    return out;
}

EnvProfile default_profile() {
    EnvProfile p;
    p.irradiance = {{0.0, 600.0}, {0.3, 1000.0}, {0.6, 1000.0}, {0.9, 400.0}, {1.2, 400.0},
                    {1.2, 800.0}, {1.5, 800.0},  {1.8, 1000.0}, {2.0, 1000.0}};
    p.temperature = {{0.0, 25.0}, {1.0, 35.0}};
    return p;
}

EnvProfile constant_profile(double irradiance, double temperature) {
    EnvProfile p;
    p.irradiance = {{0.0, irradiance}};
    p.temperature = {{0.0, temperature}};
    return p;
}

void validate(const PolyBasis& basis) {
    if (basis.degree < 2) {
        throw ValidationError("polynomial degree must be at least 2");
    }
    if (!(basis.scale > 0.0) || !std::isfinite(basis.center)) {
        throw ValidationError("polynomial scale must be positive and center finite");
    }
}

Vec PolyBasis::eval(double v) const {
    const double s = (v - center) / scale;
    Vec out(degree + 1);
    out[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        out[j] = out[j - 1] * s;
    }
    return out;
}

Vec PolyBasis::derivative(double v) const {
    const double s = (v - center) / scale;
    Vec out = Vec::Zero(degree + 1);
    double pw = 1.0;
    for (int j = 1; j <= degree; ++j) {
        out[j] = j * pw / scale;
        pw *= s;
    }
    return out;
}

Vec PolyBasis::second_derivative(double v) const {
    const double s = (v - center) / scale;
    Vec out = Vec::Zero(degree + 1);
    double pw = 1.0;
    for (int j = 2; j <= degree; ++j) {
        out[j] = j * (j - 1) * pw / (scale * scale);
        pw *= s;
    }
    return out;
}

RewardModel pv_poly_reward(const PvRewardSpec& spec) {
    validate(spec.basis);
    if (!(spec.v_lo < spec.v_hi) || !(spec.r_lo < spec.r_hi) || spec.r_lo < spec.v_lo || spec.r_hi > spec.v_hi) {
        throw ValidationError("PV reward ranges must be ordered with the optimum range inside the admissible one");
    }
    const PolyBasis basis = spec.basis;
    const double r_lo = spec.r_lo;
    const double r_hi = spec.r_hi;

    RewardModel::Parts parts;
    parts.name = "pv-poly";
    parts.param_dim = basis.degree + 1;
    parts.output_dim = 1;
    parts.admissible = Box::interval(spec.v_lo, spec.v_hi);
    parts.basis = [basis](const Vec& y) { return basis.eval(y[0]); };
    parts.basis_jacobian = [basis](const Vec& y) { return Mat(basis.derivative(y[0])); };
    parts.optimum = [basis, r_lo, r_hi](const Vec& theta) {
        return scalar_vec(poly_argmax(basis, theta.data(), 1, r_lo, r_hi));
    };
    parts.optimum_jacobian = [basis, r_lo, r_hi](const Vec& theta) {
        const double r = poly_argmax(basis, theta.data(), 1, r_lo, r_hi);
        Mat jac = Mat::Zero(1, theta.size());
        const double curv = basis.second_derivative(r).dot(theta);
        if (r > r_lo && r < r_hi && curv < 0.0) {
            jac.row(0) = -basis.derivative(r).transpose() / curv;
        }
        return jac;
    };
    parts.guarded_batch = [basis, r_lo, r_hi](std::span<const double> theta, std::size_t n, std::span<double> out) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = poly_argmax(basis, theta.data() + i, n, r_lo, r_hi);
        }
    };
    return RewardModel(std::move(parts));
}

Vec fit_poly(const PvParams& params, const PolyBasis& basis, double irradiance, double temperature, double v_from,
             double v_to, int n_points) {
    validate(basis);
    if (n_points <= basis.degree || !(v_from < v_to)) {
        throw ValidationError("polynomial fit needs an ordered range and more points than coefficients");
    }
    Mat phi(n_points, basis.degree + 1);
    Vec p(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double v = v_from + (v_to - v_from) * i / (n_points - 1);
        phi.row(i) = basis.eval(v).transpose();
        p[i] = pv_power(params, v, irradiance, temperature);
    }
    return phi.colPivHouseholderQr().solve(p);
}

double poly_fit_error(const PvParams& params, const PolyBasis& basis, const Vec& coeffs, double irradiance,
                      double temperature, double v_from, double v_to, int n_points) {
    double err2 = 0.0;
    double ref2 = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double v = v_from + (v_to - v_from) * i / (n_points - 1);
        const double p = pv_power(params, v, irradiance, temperature);
        const double e = basis.eval(v).dot(coeffs) - p;
        err2 += e * e;
        ref2 += p * p;
    }
    return std::sqrt(err2 / ref2);
}

} // namespace dcee
