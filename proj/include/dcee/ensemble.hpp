#pragma once

// Ensemble of gradient-descent regressors. Each member follows
//   theta_i <- theta_i - eta_i * phi(y) * (phi(y)^T theta_i - (J - known(y)))
// and the spread of the members' predicted optima is the exploration signal.

#include "dcee/random.hpp"
#include "dcee/reward.hpp"
#include "dcee/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dcee {

class Ensemble {
  public:
    Ensemble(Eigen::Index dim, std::vector<double> theta, std::vector<double> rates, std::int64_t step = 0);

    static Ensemble from_members(const std::vector<Vec>& members, std::vector<double> rates);
    static Ensemble from_members(const std::vector<Vec>& members, double shared_rate);

    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return rates_.size(); }
    [[nodiscard]] std::int64_t step() const { return step_; }
    [[nodiscard]] std::span<const double> rates() const { return rates_; }

    // Structure-of-arrays storage: component j of every member is contiguous.
    [[nodiscard]] std::span<const double> values() const { return theta_; }
    [[nodiscard]] std::span<double> values() { return theta_; }
    [[nodiscard]] std::span<const double> row(Eigen::Index j) const;

    [[nodiscard]] Vec member(std::size_t i) const;
    [[nodiscard]] double at(Eigen::Index j, std::size_t i) const { return theta_[std::size_t(j) * size() + i]; }

    void advance() { ++step_; }

  private:
    Eigen::Index dim_;
    std::vector<double> theta_;
    std::vector<double> rates_;
    std::int64_t step_;
};

struct BeliefStats {
    Vec mean;        // theta bar
    Vec theta_std;   // elementwise population std of the members
    Mat deviations;  // column i is theta_i - theta bar
    Mat optima;      // column i is l(theta_i), guarded
    Vec r_mean;      // r bar
    double r_var = 0.0; // (1/N) sum ||l(theta_i) - r bar||^2

    // (theta_i - theta bar)(theta_i - theta bar)^T, i.e. one diagonal block of P(k|k).
    [[nodiscard]] Mat spread_block(Eigen::Index i) const;
    // (1/N) sum of the spread blocks.
    [[nodiscard]] Mat covariance() const;
};

Ensemble init_ensemble(std::size_t n, const Vec& prior_low, const Vec& prior_high, std::span<const double> rates, Rng& rng);

Ensemble adapt(const Ensemble& ens, const Vec& y_prev, double j_obs, const RewardModel& model);
// In-place form used by the simulation loop.
void adapt_inplace(Ensemble& ens, const Vec& y_prev, double j_obs, const RewardModel& model);

BeliefStats stats(const Ensemble& ens, const RewardModel& model);

struct ParamMoments {
    Vec mean;
    Vec theta_std;
};

// The mean and theta_std fields of stats(), bit-identical.
ParamMoments param_moments(const Ensemble& ens);

// Members after one noise-free adaptation step at y_cand, using the ensemble
// mean to predict the reward there.
Ensemble predict_members(const Ensemble& ens, const Vec& y_cand, const RewardModel& model);

BeliefStats predict(const Ensemble& ens, const Vec& y_cand, const RewardModel& model);

struct SpreadStats {
    Vec r_mean;
    double r_var = 0.0;
};

// The r_mean and r_var fields of predict(), bit-identical, without building
// the per-member matrices. This is the inner loop of the exploration gradient.
SpreadStats predict_spread(const Ensemble& ens, const Vec& y_cand, const RewardModel& model);

// Alternative exploration diagnostic: trace(F^T P(k|k) F) with
// F_i = [J(theta_i, y) - J(k+1|k)] phi(y).
double trace_form_exploration(const Ensemble& ens, const Vec& y_cand, const RewardModel& model);

// ||I - eta phi phi^T||_2 for one regressor sample.
double transition_norm(double rate, const Vec& phi);

// Steady-state mean-square-error bound eta^2 L^2 varrho^2 / (1 - max ||A(j)||).
double mse_bound(double rate, double regressor_bound, double noise_var, double max_a_norm);

} // namespace dcee
