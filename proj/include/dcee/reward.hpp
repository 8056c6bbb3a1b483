#pragma once

// Parameterised rewards J(theta, y) = known(y) + phi(y)^T theta, the noisy
// measurement channel, and the optimum map r = l(theta).

#include "dcee/random.hpp"
#include "dcee/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace dcee {

struct NoiseSpec {
    double variance = 0.0; // zero-mean Gaussian, variance in reward units squared
};

struct Observation {
    Vec y;
    double j_obs = 0.0;
    std::int64_t step = 0;
};

class RewardModel {
  public:
    using ScalarOfY = std::function<double(const Vec& y)>;
    using VecOfY = std::function<Vec(const Vec& y)>;
    using MatOfY = std::function<Mat(const Vec& y)>;
    using VecOfTheta = std::function<Vec(const Vec& theta)>;
    using MatOfTheta = std::function<Mat(const Vec& theta)>;
    // theta is structure-of-arrays (param_dim rows of n), out is output_dim rows of n.
    using BatchOptimum = std::function<void(std::span<const double> theta, std::size_t n, std::span<double> out)>;

    struct Parts {
        std::string name;
        Eigen::Index param_dim = 0;
        Eigen::Index output_dim = 0;
        Box admissible;
        ScalarOfY known;         // optional; zero when empty
        VecOfY basis;            // phi(y), length param_dim
        MatOfY basis_jacobian;   // d phi / d y, param_dim x output_dim
        VecOfTheta optimum;      // l(theta); throws DomainError at singularities
        MatOfTheta optimum_jacobian; // d l / d theta, output_dim x param_dim
        // Ensemble-facing map that never hits a singularity (e.g. clamps theta
        // to a positive floor). Defaults to the strict map if left empty.
        VecOfTheta guarded_optimum;
        MatOfTheta guarded_optimum_jacobian;
        BatchOptimum guarded_batch;
    };

    explicit RewardModel(Parts parts);

    [[nodiscard]] const std::string& name() const { return parts_.name; }
    [[nodiscard]] Eigen::Index param_dim() const { return parts_.param_dim; }
    [[nodiscard]] Eigen::Index output_dim() const { return parts_.output_dim; }
    [[nodiscard]] const Box& admissible() const { return parts_.admissible; }
    // max ||phi(y)|| over the admissible box, found by grid scan.
    [[nodiscard]] double regressor_bound() const { return regressor_bound_; }

    [[nodiscard]] double known(const Vec& y) const;
    [[nodiscard]] Vec basis(const Vec& y) const;
    [[nodiscard]] Mat basis_jacobian(const Vec& y) const;
    [[nodiscard]] Vec optimum(const Vec& theta) const;
    [[nodiscard]] Mat optimum_jacobian(const Vec& theta) const;
    [[nodiscard]] Vec guarded_optimum(const Vec& theta) const;
    [[nodiscard]] Mat guarded_optimum_jacobian(const Vec& theta) const;
    void guarded_optimum_batch(std::span<const double> theta, std::size_t n, std::span<double> out) const;

  private:
    void check_y(const Vec& y) const;
    void check_theta(const Vec& theta) const;

    Parts parts_;
    double regressor_bound_ = 0.0;
};

// J = c*y - theta*y^2 with c known and scalar theta > 0; l(theta) = c / (2 theta).
// theta_floor > 0 clamps ensemble members before mapping.
RewardModel quadratic_reward(double linear_coeff, double y_lo, double y_hi, double theta_floor = 1e-6);

// J = theta_0*y - theta_1*y^2 with both coefficients unknown; l = theta_0 / (2 theta_1).
RewardModel quadratic_full_reward(double y_lo, double y_hi, double theta_floor = 1e-6);

double reward_true(const RewardModel& model, const Vec& theta, const Vec& y);

Observation observe(const RewardModel& model, const Vec& theta_true, const Vec& y, const NoiseSpec& noise, Rng& rng,
                    std::int64_t step = 0);

Vec optimum_of(const RewardModel& model, const Vec& theta);

} // namespace dcee
