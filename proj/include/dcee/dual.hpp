#pragma once

// Dual gradient step u = -delta * (grad C + grad P) for the single-integrator
// decision variable y(k+1) = y(k) + u(k).
//   C(k+1|k) = ||y - r_bar(k+1|k)||^2   exploitation
//   P(k+1|k) = spread of predicted optima  exploration

#include "dcee/ensemble.hpp"
#include "dcee/reward.hpp"

#include <optional>

namespace dcee {

enum class ExploreGradient { FiniteDifference, Analytic };

struct DualState {
    Vec y;
    double step_size = 0.5;
    double fd_eps = 1e-5;
};

struct DualOptions {
    ExploreGradient gradient = ExploreGradient::FiniteDifference;
    // Saturation applied to y + u; u itself is reported unsaturated.
    std::optional<Box> limits;
    // ||L(k)|| used by the contraction diagnostic; exactly 2 for the quadratic exploit term.
    double hessian_bound = 2.0;
};

struct DualDiagnostics {
    Vec exploit_grad;
    Vec explore_grad;
    Vec u;
    Vec r_mean;            // r_bar(k+1|k) at the evaluation point
    double p_explore = 0.0; // P(k+1|k) at the evaluation point
    bool contraction_ok = false;
    bool one_sided = false;
    bool saturated = false;
};

struct ExploreGradResult {
    Vec grad;
    bool one_sided = false;
};

Vec exploit_grad(const Vec& y, const Vec& r_mean);

// Central finite difference of P(k+1|k) in each component of y. Falls back to
// a one-sided difference (and warns) where y +/- fd_eps leaves the admissible box.
ExploreGradResult explore_grad(const Vec& y, const Ensemble& ens, const RewardModel& model, double fd_eps);

// Closed-form gradient through the prediction step, using the model's basis
// and optimum jacobians.
Vec explore_grad_analytic(const Vec& y, const Ensemble& ens, const RewardModel& model);

struct DualStep {
    DualState state;
    DualDiagnostics diag;
};

DualStep dcee_step(const DualState& state, const Ensemble& ens, const RewardModel& model, const DualOptions& opts = {});

// 0 <= 2 ||I - delta L||^2 < 1, with L = hessian_bound * I.
bool contraction_check(double delta, double hessian_bound);
bool contraction_check(double delta, const Mat& hessian);

} // namespace dcee
