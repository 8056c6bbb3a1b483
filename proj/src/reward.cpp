#include "dcee/reward.hpp"

#include "dcee/error.hpp"
#include "dcee/simd/kernels.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dcee {
namespace {

constexpr Eigen::Index kBoundScanPoints = 10001;

double scan_regressor_bound(const RewardModel& model) {
    const Box& box = model.admissible();
    const Eigen::Index q = box.dim();
    // Per-axis resolution shrinks with dimension to keep the scan bounded.
    Eigen::Index per_axis = kBoundScanPoints;
    if (q > 1) {
        per_axis = std::max<Eigen::Index>(
            3, static_cast<Eigen::Index>(std::pow(static_cast<double>(kBoundScanPoints), 1.0 / double(q))));
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(q), 0);
    double best = 0.0;
    Vec y(q);
    while (true) {
        for (Eigen::Index c = 0; c < q; ++c) {
            const double frac = per_axis == 1 ? 0.0 : double(idx[std::size_t(c)]) / double(per_axis - 1);
            y[c] = box.lo[c] + frac * (box.hi[c] - box.lo[c]);
        }
        best = std::max(best, model.basis(y).norm());
        Eigen::Index c = 0;
        while (c < q && ++idx[std::size_t(c)] == per_axis) {
            idx[std::size_t(c)] = 0;
            ++c;
        }
        if (c == q) {
            break;
        }
    }
    return best;
}

std::string dims(const char* what, Eigen::Index got, Eigen::Index want) {
    std::ostringstream os;
    os << what << " has dimension " << got << ", model expects " << want;
    return os.str();
}

} // namespace

RewardModel::RewardModel(Parts parts) : parts_(std::move(parts)) {
    if (parts_.param_dim < 1 || parts_.output_dim < 1) {
        throw ValidationError("reward model '" + parts_.name + "' needs positive parameter and output dimensions");
    }
    if (parts_.admissible.dim() != parts_.output_dim || (parts_.admissible.lo.array() > parts_.admissible.hi.array()).any()) {
        throw ValidationError("reward model '" + parts_.name + "' has an invalid admissible range");
    }
    if (!parts_.basis || !parts_.basis_jacobian || !parts_.optimum || !parts_.optimum_jacobian) {
        throw ValidationError("reward model '" + parts_.name + "' is missing basis or optimum callbacks");
    }
    if (!parts_.guarded_optimum) {
        parts_.guarded_optimum = parts_.optimum;
        parts_.guarded_optimum_jacobian = parts_.optimum_jacobian;
    }
    if (!parts_.guarded_optimum_jacobian) {
        throw ValidationError("reward model '" + parts_.name + "' has a guarded optimum without its jacobian");
    }
    regressor_bound_ = scan_regressor_bound(*this);
}

void RewardModel::check_y(const Vec& y) const {
    if (y.size() != parts_.output_dim) {
        throw ValidationError(dims("output", y.size(), parts_.output_dim));
    }
}

void RewardModel::check_theta(const Vec& theta) const {
    if (theta.size() != parts_.param_dim) {
        throw ValidationError(dims("parameter vector", theta.size(), parts_.param_dim));
    }
}

double RewardModel::known(const Vec& y) const {
    check_y(y);
    return parts_.known ? parts_.known(y) : 0.0;
}

Vec RewardModel::basis(const Vec& y) const {
    check_y(y);
    return parts_.basis(y);
}

Mat RewardModel::basis_jacobian(const Vec& y) const {
    check_y(y);
    return parts_.basis_jacobian(y);
}

Vec RewardModel::optimum(const Vec& theta) const {
    check_theta(theta);
    return parts_.optimum(theta);
}

Mat RewardModel::optimum_jacobian(const Vec& theta) const {
    check_theta(theta);
    return parts_.optimum_jacobian(theta);
}

Vec RewardModel::guarded_optimum(const Vec& theta) const {
    check_theta(theta);
    return parts_.guarded_optimum(theta);
}

Mat RewardModel::guarded_optimum_jacobian(const Vec& theta) const {
    check_theta(theta);
    return parts_.guarded_optimum_jacobian(theta);
}

void RewardModel::guarded_optimum_batch(std::span<const double> theta, std::size_t n, std::span<double> out) const {
    const auto m = static_cast<std::size_t>(parts_.param_dim);
    const auto q = static_cast<std::size_t>(parts_.output_dim);
    if (theta.size() != m * n || out.size() != q * n) {
        throw ValidationError("batch optimum buffers do not match the model dimensions");
    }
    if (parts_.guarded_batch) {
        parts_.guarded_batch(theta, n, out);
        return;
    }
    Vec column(parts_.param_dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            column[Eigen::Index(j)] = theta[j * n + i];
        }
        const Vec r = parts_.guarded_optimum(column);
        for (std::size_t c = 0; c < q; ++c) {
            out[c * n + i] = r[Eigen::Index(c)];
        }
    }
}

RewardModel quadratic_reward(double linear_coeff, double y_lo, double y_hi, double theta_floor) {
    if (!(linear_coeff > 0.0)) {
        throw ValidationError("quadratic reward needs a positive linear coefficient");
    }
    RewardModel::Parts p;
    p.name = "quadratic";
    p.param_dim = 1;
    p.output_dim = 1;
    p.admissible = Box::interval(y_lo, y_hi);
    p.known = [linear_coeff](const Vec& y) { return linear_coeff * y[0]; };
    p.basis = [](const Vec& y) { return scalar_vec(-y[0] * y[0]); };
    p.basis_jacobian = [](const Vec& y) { return Mat::Constant(1, 1, -2.0 * y[0]); };
    const double half = 0.5 * linear_coeff;
    p.optimum = [half](const Vec& theta) {
        if (!(theta[0] > 0.0)) {
            throw DomainError("optimum map c/(2 theta) is undefined for theta <= 0");
        }
        return scalar_vec(half / theta[0]);
    };
    p.optimum_jacobian = [half](const Vec& theta) {
        if (!(theta[0] > 0.0)) {
            throw DomainError("optimum map c/(2 theta) is undefined for theta <= 0");
        }
        return Mat::Constant(1, 1, -half / (theta[0] * theta[0]));
    };
    if (theta_floor > 0.0) {
        p.guarded_optimum = [half, theta_floor](const Vec& theta) {
            return scalar_vec(half / (theta_floor > theta[0] ? theta_floor : theta[0]));
        };
        p.guarded_optimum_jacobian = [half, theta_floor](const Vec& theta) -> Mat {
            if (theta_floor > theta[0]) {
                return Mat::Zero(1, 1);
            }
            return Mat::Constant(1, 1, -half / (theta[0] * theta[0]));
        };
        p.guarded_batch = [half, theta_floor](std::span<const double> theta, std::size_t, std::span<double> out) {
            simd::active().floored_reciprocal(theta, half, theta_floor, out);
        };
    } else {
        p.guarded_batch = [half](std::span<const double> theta, std::size_t, std::span<double> out) {
            for (double t : theta) {
                if (!(t > 0.0)) {
                    throw DomainError("ensemble member reached theta <= 0 with no floor configured");
                }
            }
            simd::active().floored_reciprocal(theta, half, 0.0, out);
        };
    }
    return RewardModel(std::move(p));
}

RewardModel quadratic_full_reward(double y_lo, double y_hi, double theta_floor) {
    RewardModel::Parts p;
    p.name = "quadratic-full";
    p.param_dim = 2;
    p.output_dim = 1;
    p.admissible = Box::interval(y_lo, y_hi);
    p.basis = [](const Vec& y) {
        Vec phi(2);
        phi << y[0], -y[0] * y[0];
        return phi;
    };
    p.basis_jacobian = [](const Vec& y) {
        Mat j(2, 1);
        j << 1.0, -2.0 * y[0];
        return j;
    };
    p.optimum = [](const Vec& theta) {
        if (!(theta[1] > 0.0)) {
            throw DomainError("quadratic optimum is undefined without positive curvature");
        }
        return scalar_vec(0.5 * theta[0] / theta[1]);
    };
    p.optimum_jacobian = [](const Vec& theta) {
        if (!(theta[1] > 0.0)) {
            throw DomainError("quadratic optimum is undefined without positive curvature");
        }
        Mat j(1, 2);
        j << 0.5 / theta[1], -0.5 * theta[0] / (theta[1] * theta[1]);
        return j;
    };
    if (theta_floor > 0.0) {
        p.guarded_optimum = [theta_floor](const Vec& theta) {
            const double c = theta_floor > theta[1] ? theta_floor : theta[1];
            return scalar_vec(0.5 * theta[0] / c);
        };
        p.guarded_optimum_jacobian = [theta_floor](const Vec& theta) {
            Mat j(1, 2);
            if (theta_floor > theta[1]) {
                j << 0.5 / theta_floor, 0.0;
            } else {
                j << 0.5 / theta[1], -0.5 * theta[0] / (theta[1] * theta[1]);
            }
            return j;
        };
    }
    return RewardModel(std::move(p));
}

double reward_true(const RewardModel& model, const Vec& theta, const Vec& y) {
    if (theta.size() != model.param_dim()) {
        throw ValidationError(dims("parameter vector", theta.size(), model.param_dim()));
    }
    return model.known(y) + model.basis(y).dot(theta);
}

Observation observe(const RewardModel& model, const Vec& theta_true, const Vec& y, const NoiseSpec& noise, Rng& rng,
                    std::int64_t step) {
    if (!(noise.variance >= 0.0)) {
        throw ValidationError("noise variance must be nonnegative");
    }
    Observation obs;
    obs.y = y;
    obs.step = step;
    obs.j_obs = reward_true(model, theta_true, y);
    if (noise.variance > 0.0) {
        std::normal_distribution<double> dist(0.0, std::sqrt(noise.variance));
        obs.j_obs += dist(rng);
    }
    return obs;
}

Vec optimum_of(const RewardModel& model, const Vec& theta) { return model.optimum(theta); }

} // namespace dcee
