#include "dcee/dual.hpp"

#include "dcee/error.hpp"
#include "dcee/log.hpp"

#include <cmath>
#include <sstream>

namespace dcee {

Vec exploit_grad(const Vec& y, const Vec& r_mean) {
    if (y.size() != r_mean.size()) {
        throw ValidationError("exploitation gradient: output and optimum dimensions differ");
    }
    return 2.0 * (y - r_mean);
}

ExploreGradResult explore_grad(const Vec& y, const Ensemble& ens, const RewardModel& model, double fd_eps) {
    if (!(fd_eps > 0.0)) {
        throw ValidationError("finite-difference half-width must be positive");
    }
    const Box& box = model.admissible();
    ExploreGradResult out;
    out.grad = Vec::Zero(y.size());
    std::optional<double> centre;
    auto p_at = [&](const Vec& c) { return predict_spread(ens, c, model).r_var; };

    for (Eigen::Index c = 0; c < y.size(); ++c) {
        Vec plus = y;
        Vec minus = y;
        plus[c] += fd_eps;
        minus[c] -= fd_eps;
        const bool up_ok = plus[c] <= box.hi[c];
        const bool down_ok = minus[c] >= box.lo[c];
        if (up_ok && down_ok) {
            out.grad[c] = (p_at(plus) - p_at(minus)) / (2.0 * fd_eps);
            continue;
        }
        out.one_sided = true;
        if (!centre) {
            centre = p_at(y);
        }
        if (up_ok) {
            out.grad[c] = (p_at(plus) - *centre) / fd_eps;
        } else if (down_ok) {
            out.grad[c] = (*centre - p_at(minus)) / fd_eps;
        }
        std::ostringstream os;
        os << "exploration gradient component " << c << " at y=" << y[c]
           << " uses a one-sided difference (admissible range edge)";
        log::warn(os.str());
    }
    return out;
}

Vec explore_grad_analytic(const Vec& y, const Ensemble& ens, const RewardModel& model) {
    const BeliefStats now = stats(ens, model);
    const Ensemble next = predict_members(ens, y, model);
    const BeliefStats pred = stats(next, model);
    const Vec phi = model.basis(y);
    const Mat dphi = model.basis_jacobian(y); // m x q
    const std::size_t n = ens.size();

    Vec grad = Vec::Zero(y.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto col = Eigen::Index(i);
        const Vec d = now.deviations.col(col);
        const double proj = phi.dot(d);
        const Mat jl = model.guarded_optimum_jacobian(next.member(i)); // q x m
        const Vec weight = jl.transpose() * (pred.optima.col(col) - pred.r_mean);
        const double eta = ens.rates()[i];
        for (Eigen::Index c = 0; c < y.size(); ++c) {
            const Vec dtheta = -eta * (dphi.col(c) * proj + phi * dphi.col(c).dot(d));
            grad[c] += weight.dot(dtheta);
        }
    }
    return (2.0 / double(n)) * grad;
}

DualStep dcee_step(const DualState& state, const Ensemble& ens, const RewardModel& model, const DualOptions& opts) {
    if (!(state.step_size > 0.0) || !(state.fd_eps > 0.0)) {
        throw ValidationError("dual step needs positive step size and finite-difference width");
    }
    const SpreadStats pred = predict_spread(ens, state.y, model);

    DualStep out;
    DualDiagnostics& d = out.diag;
    d.r_mean = pred.r_mean;
    d.p_explore = pred.r_var;
    d.exploit_grad = exploit_grad(state.y, pred.r_mean);
    if (opts.gradient == ExploreGradient::Analytic) {
        d.explore_grad = explore_grad_analytic(state.y, ens, model);
    } else {
        ExploreGradResult g = explore_grad(state.y, ens, model, state.fd_eps);
        d.explore_grad = std::move(g.grad);
        d.one_sided = g.one_sided;
    }
    if (!d.exploit_grad.allFinite() || !d.explore_grad.allFinite()) {
        throw NumericalError("dual gradient is not finite; step aborted");
    }
    d.u = -state.step_size * (d.exploit_grad + d.explore_grad);
    d.contraction_ok = contraction_check(state.step_size, opts.hessian_bound);

    out.state = state;
    out.state.y = state.y + d.u;
    if (opts.limits) {
        const Vec clamped = opts.limits->clamp(out.state.y);
        d.saturated = (clamped.array() != out.state.y.array()).any();
        out.state.y = clamped;
    }
    return out;
}

bool contraction_check(double delta, double hessian_bound) {
    const double s = 1.0 - delta * hessian_bound;
    const double alpha = 2.0 * s * s;
    return alpha >= 0.0 && alpha < 1.0;
}

bool contraction_check(double delta, const Mat& hessian) {
    if (hessian.rows() != hessian.cols()) {
        throw ValidationError("contraction check needs a square hessian");
    }
    const Mat m = Mat::Identity(hessian.rows(), hessian.cols()) - delta * hessian;
    const double norm = Eigen::JacobiSVD<Mat>(m).singularValues()(0);
    const double alpha = 2.0 * norm * norm;
    return alpha >= 0.0 && alpha < 1.0;
}

} // namespace dcee
