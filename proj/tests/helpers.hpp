#pragma once

#include "dcee/ensemble.hpp"
#include "dcee/reward.hpp"

#include <cmath>
#include <vector>

namespace testing {

using dcee::Mat;
using dcee::Vec;

// J = 2y - theta y^2 on [-3, 3], the reference linear example.
inline dcee::RewardModel example_reward() { return dcee::quadratic_reward(2.0, -3.0, 3.0); }

// Scalar model with l(theta) = theta, for checking sample statistics directly.
inline dcee::RewardModel identity_optimum_model(double phi_value = 1.0) {
    dcee::RewardModel::Parts p;
    p.name = "identity";
    p.param_dim = 1;
    p.output_dim = 1;
    p.admissible = dcee::Box::interval(-10.0, 10.0);
    p.basis = [phi_value](const Vec&) { return dcee::scalar_vec(phi_value); };
    p.basis_jacobian = [](const Vec&) { return Mat(Mat::Zero(1, 1)); };
    p.optimum = [](const Vec& theta) { return theta; };
    p.optimum_jacobian = [](const Vec&) { return Mat(Mat::Identity(1, 1)); };
    return dcee::RewardModel(std::move(p));
}

inline dcee::Ensemble scalar_ensemble(const std::vector<double>& thetas, double rate) {
    std::vector<Vec> members;
    for (double t : thetas) {
        members.push_back(dcee::scalar_vec(t));
    }
    return dcee::Ensemble::from_members(members, rate);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace testing
