#pragma once

// DCEE for x(k+1) = A x + B u, y = C x. The dual step drives an internal
// reference xi, and state feedback built from the regulation equations
//   (A - I) Psi + B G = 0,  C Psi = I
// makes the plant track it: u = -K x + (G + K Psi) xi.

#include "dcee/dual.hpp"
#include "dcee/ensemble.hpp"
#include "dcee/reward.hpp"

#include <complex>
#include <span>

namespace dcee {

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kRegulationTolerance = 1e-10;

class LinearPlant {
  public:
    LinearPlant(Mat a, Mat b, Mat c, Vec x0);

    [[nodiscard]] const Mat& A() const { return a_; }
    [[nodiscard]] const Mat& B() const { return b_; }
    [[nodiscard]] const Mat& C() const { return c_; }
    [[nodiscard]] const Vec& x() const { return x_; }
    [[nodiscard]] Vec output() const { return c_ * x_; }

    [[nodiscard]] Eigen::Index states() const { return a_.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return b_.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return c_.rows(); }

    // x <- A x + B u
    void step(const Vec& u);

  private:
    Mat a_, b_, c_;
    Vec x_;
};

struct ServoGains {
    Mat Psi; // n x q
    Mat G;   // p x q
    Mat K;   // p x n
};

struct ServoState {
    Vec xi;
};

struct RegulationSolution {
    Mat Psi;
    Mat G;
};

[[nodiscard]] Eigen::Index numerical_rank(const Mat& m, double rel_tol = kRankTolerance);
[[nodiscard]] bool is_controllable(const Mat& a, const Mat& b, double rel_tol = kRankTolerance);
[[nodiscard]] double spectral_radius(const Mat& m);

// rank [[A - I, B], [C, 0]] == n + q
[[nodiscard]] bool check_rank(const Mat& a, const Mat& b, const Mat& c, double rel_tol = kRankTolerance);

RegulationSolution solve_regulation(const Mat& a, const Mat& b, const Mat& c);

// Single-input pole placement by Ackermann's formula. Poles must be closed
// under complex conjugation.
Mat stabilizing_gain(const Mat& a, const Mat& b, std::span<const std::complex<double>> poles);

// Checks the regulation residuals and Schur stability of A - B K.
ServoGains make_gains(const LinearPlant& plant, Mat psi, Mat g, Mat k);

struct ServoDiagnostics {
    DualDiagnostics dual;
    Vec psi; // reference increment
    Vec u;   // plant input
    Vec e;   // y - xi after the step
};

struct ServoStep {
    LinearPlant plant;
    ServoState servo;
    ServoDiagnostics diag;
};

// xi' = xi + psi (psi from the dual step at xi), u = -K x + (G + K Psi) xi',
// x' = A x + B u.
ServoStep servo_step(const LinearPlant& plant, const ServoState& servo, const ServoGains& gains, const Ensemble& ens,
                     const RewardModel& model, double delta, double fd_eps, const DualOptions& opts = {});

} // namespace dcee
