#include "dcee/servo.hpp"

#include "dcee/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcee {
namespace {

void check_dims(const Mat& a, const Mat& b, const Mat& c) {
    if (a.rows() == 0 || a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows() || b.cols() == 0 ||
        c.rows() == 0) {
        throw ValidationError("plant matrices have inconsistent dimensions");
    }
}

Mat controllability_matrix(const Mat& a, const Mat& b) {
    const Eigen::Index n = a.rows();
    Mat ctrb(n, n * b.cols());
    Mat block = b;
    for (Eigen::Index i = 0; i < n; ++i) {
        ctrb.middleCols(i * b.cols(), b.cols()) = block;
        block = a * block;
    }
    return ctrb;
}

} // namespace

LinearPlant::LinearPlant(Mat a, Mat b, Mat c, Vec x0)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), x_(std::move(x0)) {
    check_dims(a_, b_, c_);
    if (x_.size() != a_.rows()) {
        throw ValidationError("initial state dimension does not match A");
    }
    if (!is_controllable(a_, b_)) {
        throw ValidationError("the pair (A, B) is not controllable");
    }
}

void LinearPlant::step(const Vec& u) {
    if (u.size() != inputs()) {
        throw ValidationError("plant input has the wrong dimension");
    }
    x_ = a_ * x_ + b_ * u;
}

Eigen::Index numerical_rank(const Mat& m, double rel_tol) {
    if (m.size() == 0) {
        return 0;
    }
    const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) {
        return 0;
    }
    const double cutoff = rel_tol * sv[0];
    return Eigen::Index(std::count_if(sv.begin(), sv.end(), [cutoff](double s) { return s > cutoff; }));
}

bool is_controllable(const Mat& a, const Mat& b, double rel_tol) {
    return numerical_rank(controllability_matrix(a, b), rel_tol) == a.rows();
}

double spectral_radius(const Mat& m) {
    return Eigen::EigenSolver<Mat>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

bool check_rank(const Mat& a, const Mat& b, const Mat& c, double rel_tol) {
    check_dims(a, b, c);
    const Eigen::Index n = a.rows();
    const Eigen::Index p = b.cols();
    const Eigen::Index q = c.rows();
    Mat stacked = Mat::Zero(n + q, n + p);
    stacked.topLeftCorner(n, n) = a - Mat::Identity(n, n);
    stacked.topRightCorner(n, p) = b;
    stacked.bottomLeftCorner(q, n) = c;
    return numerical_rank(stacked, rel_tol) == n + q;
}

RegulationSolution solve_regulation(const Mat& a, const Mat& b, const Mat& c) {
    if (!check_rank(a, b, c)) {
        throw DomainError("regulation equations unsolvable: rank [[A - I, B], [C, 0]] != n + q");
    }
    const Eigen::Index n = a.rows();
    const Eigen::Index p = b.cols();
    const Eigen::Index q = c.rows();
    Mat stacked = Mat::Zero(n + q, n + p);
    stacked.topLeftCorner(n, n) = a - Mat::Identity(n, n);
    stacked.topRightCorner(n, p) = b;
    stacked.bottomLeftCorner(q, n) = c;
    Mat rhs = Mat::Zero(n + q, q);
    rhs.bottomRows(q) = Mat::Identity(q, q);

    const Mat sol = stacked.completeOrthogonalDecomposition().solve(rhs);
    RegulationSolution out{sol.topRows(n), sol.bottomRows(p)};

    const double r1 = ((a - Mat::Identity(n, n)) * out.Psi + b * out.G).norm();
    const double r2 = (c * out.Psi - Mat::Identity(q, q)).norm();
    if (!(r1 < kRegulationTolerance) || !(r2 < kRegulationTolerance)) {
        std::ostringstream os;
        os << "regulation solve residuals too large: " << r1 << ", " << r2;
        throw NumericalError(os.str());
    }
    return out;
}

Mat stabilizing_gain(const Mat& a, const Mat& b, std::span<const std::complex<double>> poles) {
    check_dims(a, b, Mat::Identity(1, a.rows()));
    const Eigen::Index n = a.rows();
    if (b.cols() != 1) {
        throw ValidationError("pole placement supports single-input plants only; supply K directly");
    }
    if (Eigen::Index(poles.size()) != n) {
        throw ValidationError("pole placement needs exactly one pole per state");
    }
    for (const auto& pole : poles) {
        const bool has_conjugate = std::any_of(poles.begin(), poles.end(), [&](const std::complex<double>& o) {
            return std::abs(o - std::conj(pole)) <= 1e-12 * std::max(1.0, std::abs(pole));
        });
        if (!has_conjugate) {
            throw ValidationError("requested poles are not closed under complex conjugation");
        }
    }
    const Mat ctrb = controllability_matrix(a, b);
    if (numerical_rank(ctrb) != n) {
        throw ValidationError("the pair (A, B) is not controllable");
    }

    // Desired characteristic polynomial, highest power first.
    std::vector<std::complex<double>> coeff{1.0};
    for (const auto& pole : poles) {
        std::vector<std::complex<double>> next(coeff.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            next[i] += coeff[i];
            next[i + 1] -= coeff[i] * pole;
        }
        coeff = std::move(next);
    }
    Mat phi_a = Mat::Zero(n, n);
    for (const auto& cf : coeff) {
        phi_a = phi_a * a + cf.real() * Mat::Identity(n, n);
    }

    Mat last = Mat::Zero(1, n);
    last(0, n - 1) = 1.0;
    const Mat k = last * ctrb.fullPivLu().solve(phi_a);

    // Verify the closed-loop spectrum against the request.
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Mat>(a - b * k, false).eigenvalues();
    std::vector<bool> used(poles.size(), false);
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        double best = INFINITY;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < poles.size(); ++j) {
            const double dist = std::abs(eig[i] - poles[j]);
            if (!used[j] && dist < best) {
                best = dist;
                best_j = j;
            }
        }
        if (!(best < 1e-8)) {
            throw NumericalError("pole placement missed a requested pole; problem is ill-conditioned");
        }
        used[best_j] = true;
    }
    return k;
}

ServoGains make_gains(const LinearPlant& plant, Mat psi, Mat g, Mat k) {
    const Eigen::Index n = plant.states();
    const Eigen::Index p = plant.inputs();
    const Eigen::Index q = plant.outputs();
    if (psi.rows() != n || psi.cols() != q || g.rows() != p || g.cols() != q || k.rows() != p || k.cols() != n) {
        throw ValidationError("servo gain dimensions do not match the plant");
    }
    const double r1 = ((plant.A() - Mat::Identity(n, n)) * psi + plant.B() * g).norm();
    const double r2 = (plant.C() * psi - Mat::Identity(q, q)).norm();
    if (!(r1 < kRegulationTolerance) || !(r2 < kRegulationTolerance)) {
        throw ValidationError("Psi and G do not satisfy the regulation equations");
    }
    if (!(spectral_radius(plant.A() - plant.B() * k) < 1.0)) {
        throw ValidationError("A - B K is not Schur stable");
    }
    return ServoGains{std::move(psi), std::move(g), std::move(k)};
}

ServoStep servo_step(const LinearPlant& plant, const ServoState& servo, const ServoGains& gains, const Ensemble& ens,
                     const RewardModel& model, double delta, double fd_eps, const DualOptions& opts) {
    const DualStep dual = dcee_step(DualState{servo.xi, delta, fd_eps}, ens, model, opts);

    ServoStep out{plant, ServoState{dual.state.y}, {}};
    out.diag.dual = dual.diag;
    out.diag.psi = out.servo.xi - servo.xi;
    out.diag.u = -gains.K * plant.x() + (gains.G + gains.K * gains.Psi) * out.servo.xi;
    out.plant.step(out.diag.u);
    out.diag.e = out.plant.output() - out.servo.xi;
    if (!out.plant.x().allFinite()) {
        throw NumericalError("plant state diverged");
    }
    return out;
}

} // namespace dcee
