#include "dcee/ensemble.hpp"

#include "dcee/error.hpp"
#include "dcee/simd/kernels.hpp"

#include <cmath>
#include <random>

namespace dcee {
namespace {

struct RowMoments {
    double mean;
    double sq_dev;
};

// Shifting by the first element makes a fully collapsed row give mean equal
// to the members and zero deviation, exactly.
RowMoments moments(const simd::Kernels& k, std::span<const double> row) {
    const double shift = row[0];
    const double mean = shift + k.shifted_sum(row, shift) / double(row.size());
    return {mean, k.squared_deviation(row, mean)};
}

// Same association order as Kernels::project, so that a member equal to the
// mean yields an exactly zero predicted residual.
double ordered_dot(const Vec& phi, const Vec& v) {
    double acc = phi[0] * v[0];
    for (Eigen::Index j = 1; j < phi.size(); ++j) {
        acc = acc + phi[j] * v[j];
    }
    return acc;
}

Vec member_mean(const simd::Kernels& k, const Ensemble& ens) {
    Vec mean(ens.dim());
    for (Eigen::Index j = 0; j < ens.dim(); ++j) {
        const auto row = ens.row(j);
        mean[j] = row[0] + k.shifted_sum(row, row[0]) / double(ens.size());
    }
    return mean;
}

void check_regressor(const Vec& phi, const RewardModel& model) {
    if (phi.size() != model.param_dim() || !phi.allFinite()) {
        throw NumericalError("regressor is non-finite or has the wrong dimension");
    }
}

} // namespace

Ensemble::Ensemble(Eigen::Index dim, std::vector<double> theta, std::vector<double> rates, std::int64_t step)
    : dim_(dim), theta_(std::move(theta)), rates_(std::move(rates)), step_(step) {
    if (dim_ < 1 || rates_.empty()) {
        throw ValidationError("ensemble needs at least one member of positive dimension");
    }
    if (theta_.size() != std::size_t(dim_) * rates_.size()) {
        throw ValidationError("ensemble storage does not match size x dimension");
    }
    for (double r : rates_) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ValidationError("ensemble learning rates must be finite and strictly positive");
        }
    }
}

Ensemble Ensemble::from_members(const std::vector<Vec>& members, std::vector<double> rates) {
    if (members.empty()) {
        throw ValidationError("ensemble needs at least one member");
    }
    const Eigen::Index m = members.front().size();
    const std::size_t n = members.size();
    std::vector<double> theta(std::size_t(m) * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (members[i].size() != m) {
            throw ValidationError("ensemble members must share one dimension");
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            theta[std::size_t(j) * n + i] = members[i][j];
        }
    }
    return Ensemble(m, std::move(theta), std::move(rates));
}

Ensemble Ensemble::from_members(const std::vector<Vec>& members, double shared_rate) {
    return from_members(members, std::vector<double>(members.size(), shared_rate));
}

std::span<const double> Ensemble::row(Eigen::Index j) const {
    return std::span<const double>(theta_).subspan(std::size_t(j) * size(), size());
}

Vec Ensemble::member(std::size_t i) const {
    Vec v(dim_);
    for (Eigen::Index j = 0; j < dim_; ++j) {
        v[j] = at(j, i);
    }
    return v;
}

Mat BeliefStats::spread_block(Eigen::Index i) const { return deviations.col(i) * deviations.col(i).transpose(); }

Mat BeliefStats::covariance() const {
    return (deviations * deviations.transpose()) / double(deviations.cols());
}

Ensemble init_ensemble(std::size_t n, const Vec& prior_low, const Vec& prior_high, std::span<const double> rates, Rng& rng) {
    if (n == 0) {
        throw ValidationError("ensemble size must be at least 1");
    }
    if (prior_low.size() == 0 || prior_low.size() != prior_high.size()) {
        throw ValidationError("prior bounds must be non-empty and of equal dimension");
    }
    if ((prior_low.array() > prior_high.array()).any() || !prior_low.allFinite() || !prior_high.allFinite()) {
        throw ValidationError("prior bounds must be finite with low <= high");
    }
    if (rates.size() != n) {
        throw ValidationError("one learning rate per ensemble member is required");
    }
    const Eigen::Index m = prior_low.size();
    std::vector<double> theta(std::size_t(m) * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            double v = prior_low[j];
            if (prior_high[j] > prior_low[j]) {
                std::uniform_real_distribution<double> dist(prior_low[j], prior_high[j]);
                v = dist(rng);
            }
            theta[std::size_t(j) * n + i] = v;
        }
    }
    return Ensemble(m, std::move(theta), std::vector<double>(rates.begin(), rates.end()));
}

void adapt_inplace(Ensemble& ens, const Vec& y_prev, double j_obs, const RewardModel& model) {
    if (!std::isfinite(j_obs)) {
        throw NumericalError("observed reward is not finite");
    }
    if (ens.dim() != model.param_dim()) {
        throw ValidationError("ensemble dimension does not match the reward model");
    }
    const Vec phi = model.basis(y_prev);
    check_regressor(phi, model);
    const double target = j_obs - model.known(y_prev);

    const auto& k = simd::active();
    const std::span<const double> phi_span(phi.data(), std::size_t(phi.size()));
    thread_local std::vector<double> resid;
    resid.resize(ens.size());
    k.project(ens.values(), ens.size(), phi_span, target, resid);
    k.lms_update(ens.values(), ens.size(), phi_span, ens.rates(), resid);
    ens.advance();
}

Ensemble adapt(const Ensemble& ens, const Vec& y_prev, double j_obs, const RewardModel& model) {
    Ensemble next = ens;
    adapt_inplace(next, y_prev, j_obs, model);
    return next;
}

ParamMoments param_moments(const Ensemble& ens) {
    const auto& k = simd::active();
    ParamMoments p;
    p.mean.resize(ens.dim());
    p.theta_std.resize(ens.dim());
    for (Eigen::Index j = 0; j < ens.dim(); ++j) {
        const RowMoments mo = moments(k, ens.row(j));
        p.mean[j] = mo.mean;
        p.theta_std[j] = std::sqrt(mo.sq_dev / double(ens.size()));
    }
    return p;
}

BeliefStats stats(const Ensemble& ens, const RewardModel& model) {
    if (ens.dim() != model.param_dim()) {
        throw ValidationError("ensemble dimension does not match the reward model");
    }
    const auto& k = simd::active();
    const std::size_t n = ens.size();
    const Eigen::Index m = ens.dim();
    const Eigen::Index q = model.output_dim();

    BeliefStats s;
    s.mean.resize(m);
    s.theta_std.resize(m);
    s.deviations.resize(m, Eigen::Index(n));
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto row = ens.row(j);
        const RowMoments mo = moments(k, row);
        s.mean[j] = mo.mean;
        s.theta_std[j] = std::sqrt(mo.sq_dev / double(n));
        for (std::size_t i = 0; i < n; ++i) {
            s.deviations(j, Eigen::Index(i)) = row[i] - mo.mean;
        }
    }

    std::vector<double> optima(std::size_t(q) * n);
    model.guarded_optimum_batch(ens.values(), n, optima);
    s.optima.resize(q, Eigen::Index(n));
    s.r_mean.resize(q);
    s.r_var = 0.0;
    for (Eigen::Index c = 0; c < q; ++c) {
        const std::span<const double> row(optima.data() + std::size_t(c) * n, n);
        const RowMoments mo = moments(k, row);
        s.r_mean[c] = mo.mean;
        s.r_var += mo.sq_dev;
        for (std::size_t i = 0; i < n; ++i) {
            s.optima(c, Eigen::Index(i)) = row[i];
        }
    }
    s.r_var /= double(n);
    if (!std::isfinite(s.r_var) || !s.r_mean.allFinite()) {
        throw NumericalError("ensemble optimum statistics are not finite");
    }
    return s;
}

Ensemble predict_members(const Ensemble& ens, const Vec& y_cand, const RewardModel& model) {
    if (ens.dim() != model.param_dim()) {
        throw ValidationError("ensemble dimension does not match the reward model");
    }
    const auto& k = simd::active();
    const Vec phi = model.basis(y_cand);
    check_regressor(phi, model);
    const std::span<const double> phi_span(phi.data(), std::size_t(phi.size()));
    // Noise-free predicted reward from the ensemble mean, known part removed.
    const double predicted = ordered_dot(phi, member_mean(k, ens));

    Ensemble next = ens;
    std::vector<double> resid(ens.size());
    k.project(ens.values(), ens.size(), phi_span, predicted, resid);
    k.lms_update(next.values(), ens.size(), phi_span, ens.rates(), resid);
    return next;
}

BeliefStats predict(const Ensemble& ens, const Vec& y_cand, const RewardModel& model) {
    return stats(predict_members(ens, y_cand, model), model);
}

SpreadStats predict_spread(const Ensemble& ens, const Vec& y_cand, const RewardModel& model) {
    if (ens.dim() != model.param_dim()) {
        throw ValidationError("ensemble dimension does not match the reward model");
    }
    const auto& k = simd::active();
    const Vec phi = model.basis(y_cand);
    check_regressor(phi, model);
    const std::span<const double> phi_span(phi.data(), std::size_t(phi.size()));
    const double predicted = ordered_dot(phi, member_mean(k, ens));
    const std::size_t n = ens.size();
    const Eigen::Index q = model.output_dim();

    // Reused across calls on the same thread.
    thread_local std::vector<double> theta, resid, optima;
    theta.assign(ens.values().begin(), ens.values().end());
    resid.resize(n);
    optima.resize(std::size_t(q) * n);
    k.project(ens.values(), n, phi_span, predicted, resid);
    k.lms_update(theta, n, phi_span, ens.rates(), resid);
    model.guarded_optimum_batch(theta, n, optima);

    SpreadStats s;
    s.r_mean.resize(q);
    for (Eigen::Index c = 0; c < q; ++c) {
        const RowMoments mo = moments(k, std::span<const double>(optima.data() + std::size_t(c) * n, n));
        s.r_mean[c] = mo.mean;
        s.r_var += mo.sq_dev;
    }
    s.r_var /= double(n);
    if (!std::isfinite(s.r_var) || !s.r_mean.allFinite()) {
        throw NumericalError("ensemble optimum statistics are not finite");
    }
    return s;
}

double trace_form_exploration(const Ensemble& ens, const Vec& y_cand, const RewardModel& model) {
    const auto& k = simd::active();
    const Vec phi = model.basis(y_cand);
    check_regressor(phi, model);
    const Vec mean = member_mean(k, ens);
    double total = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const Vec d = ens.member(i) - mean;
        const double g = phi.dot(d); // J(theta_i, y) - J(k+1|k)
        total += (g * g) * (g * g);
    }
    return total;
}

double transition_norm(double rate, const Vec& phi) {
    const double along = std::abs(1.0 - rate * phi.squaredNorm());
    // Directions orthogonal to phi are left untouched (eigenvalue 1).
    return phi.size() > 1 ? std::max(1.0, along) : along;
}

double mse_bound(double rate, double regressor_bound, double noise_var, double max_a_norm) {
    if (!(max_a_norm < 1.0) || max_a_norm < 0.0) {
        throw DomainError("mean-square-error bound needs 0 <= max ||A(j)|| < 1 (excitation or step size too weak)");
    }
    if (!(rate > 0.0) || regressor_bound < 0.0 || noise_var < 0.0) {
        throw ValidationError("mse_bound needs rate > 0, regressor bound >= 0 and variance >= 0");
    }
    return rate * rate * regressor_bound * regressor_bound * noise_var / (1.0 - max_a_norm);
}

} // namespace dcee
