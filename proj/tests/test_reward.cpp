#include "helpers.hpp"

#include "dcee/error.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace dcee;
using testing::example_reward;

TEST_CASE("reward_true on the quadratic example") {
    const RewardModel m = example_reward();
    CHECK(reward_true(m, scalar_vec(1.0), scalar_vec(1.0)) == 1.0);
    CHECK(reward_true(m, scalar_vec(1.0), scalar_vec(0.0)) == 0.0);
    CHECK(reward_true(m, scalar_vec(2.0), scalar_vec(0.5)) == 0.5);
}

TEST_CASE("reward_true rejects dimension mismatches") {
    const RewardModel m = example_reward();
    CHECK_THROWS_AS((void)reward_true(m, Vec::Zero(2), scalar_vec(1.0)), ValidationError);
    CHECK_THROWS_AS((void)reward_true(m, scalar_vec(1.0), Vec::Zero(2)), ValidationError);
}

TEST_CASE("noise-free observation is the true reward") {
    const RewardModel m = example_reward();
    Rng rng(7);
    const Observation o = observe(m, scalar_vec(1.0), scalar_vec(1.0), NoiseSpec{0.0}, rng, 3);
    CHECK(o.j_obs == 1.0);
    CHECK(o.step == 3);

    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const Vec y = scalar_vec(u(rng));
        const Vec th = scalar_vec(u(rng) + 3.5);
        CHECK(observe(m, th, y, NoiseSpec{0.0}, rng).j_obs == reward_true(m, th, y));
    }
}

TEST_CASE("observation is deterministic under a fixed seed") {
    const RewardModel m = example_reward();
    Rng a = make_stream(42, Stream::Noise);
    Rng b = make_stream(42, Stream::Noise);
    for (int i = 0; i < 10; ++i) {
        CHECK(observe(m, scalar_vec(1.0), scalar_vec(1.0), NoiseSpec{2.0}, a).j_obs ==
              observe(m, scalar_vec(1.0), scalar_vec(1.0), NoiseSpec{2.0}, b).j_obs);
    }
}

TEST_CASE("observation noise has zero mean and the configured variance") {
    const RewardModel m = example_reward();
    Rng rng = make_stream(5, Stream::Noise);
    const int n = 100000;
    const double sigma = std::sqrt(2.0);
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double j = observe(m, scalar_vec(1.0), scalar_vec(1.0), NoiseSpec{2.0}, rng).j_obs;
        sum += j;
        sum2 += (j - 1.0) * (j - 1.0);
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 1.0) < 0.06);
    CHECK(std::abs(mean - 1.0) < 4.0 * sigma / std::sqrt(double(n)));
    // Sample variance of a Gaussian has relative std sqrt(2/n).
    CHECK(std::abs(sum2 / n - 2.0) < 4.0 * 2.0 * std::sqrt(2.0 / n));
}

TEST_CASE("observation rejects negative variance") {
    const RewardModel m = example_reward();
    Rng rng(1);
    CHECK_THROWS_AS((void)observe(m, scalar_vec(1.0), scalar_vec(1.0), NoiseSpec{-1.0}, rng), ValidationError);
}

TEST_CASE("optimum map of the quadratic example") {
    const RewardModel m = example_reward();
    CHECK(optimum_of(m, scalar_vec(1.0))[0] == 1.0);
    CHECK(optimum_of(m, scalar_vec(2.0))[0] == 0.5);
    CHECK_THROWS_AS((void)optimum_of(m, scalar_vec(0.0)), DomainError);
    CHECK_THROWS_AS((void)optimum_of(m, scalar_vec(-1.0)), DomainError);
}

TEST_CASE("guarded optimum clamps at the floor instead of failing") {
    const RewardModel m = quadratic_reward(2.0, -3.0, 3.0, 1e-6);
    CHECK(m.guarded_optimum(scalar_vec(0.0))[0] == doctest::Approx(1e6));
    CHECK(m.guarded_optimum(scalar_vec(-5.0))[0] == doctest::Approx(1e6));
    CHECK(m.guarded_optimum(scalar_vec(4.0))[0] == 0.25);
    CHECK(m.guarded_optimum_jacobian(scalar_vec(-5.0))(0, 0) == 0.0);
}

TEST_CASE("regressor bound is the max of |phi| over the admissible range") {
    CHECK(example_reward().regressor_bound() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(quadratic_reward(2.0, -0.5, 2.0).regressor_bound() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("property: l(theta) maximises the reward on a dense grid") {
    const RewardModel m = example_reward();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> th(0.34, 20.0); // keeps 1/theta inside [-3, 3]
    for (int trial = 0; trial < 50; ++trial) {
        const Vec theta = scalar_vec(th(rng));
        const double best = reward_true(m, theta, optimum_of(m, theta));
        for (int i = 0; i <= 6000; ++i) {
            const Vec y = scalar_vec(-3.0 + 6.0 * i / 6000.0);
            CHECK(best >= reward_true(m, theta, y) - 1e-12);
        }
    }
}

TEST_CASE("property: the reward is strictly concave in y for theta > 0") {
    const RewardModel m = example_reward();
    const double h = 1e-3;
    for (double theta : {0.1, 1.0, 7.5}) {
        for (double y = -2.9; y < 2.9; y += 0.1) {
            const double d2 = reward_true(m, scalar_vec(theta), scalar_vec(y + h)) -
                              2.0 * reward_true(m, scalar_vec(theta), scalar_vec(y)) +
                              reward_true(m, scalar_vec(theta), scalar_vec(y - h));
            CHECK(d2 < 0.0);
        }
    }
}

TEST_CASE("full quadratic model estimates both coefficients") {
    const RewardModel m = quadratic_full_reward(-3.0, 3.0);
    const Vec theta = (Vec(2) << 2.0, 1.0).finished();
    CHECK(reward_true(m, theta, scalar_vec(1.0)) == 1.0);
    CHECK(optimum_of(m, theta)[0] == 1.0);
    CHECK_THROWS_AS((void)optimum_of(m, (Vec(2) << 2.0, 0.0).finished()), DomainError);

    // Jacobians against central differences.
    const double h = 1e-6;
    const Mat jl = m.optimum_jacobian(theta);
    for (int j = 0; j < 2; ++j) {
        Vec up = theta, dn = theta;
        up[j] += h;
        dn[j] -= h;
        CHECK(jl(0, j) == doctest::Approx((optimum_of(m, up)[0] - optimum_of(m, dn)[0]) / (2 * h)).epsilon(1e-7));
    }
    const Mat jb = m.basis_jacobian(scalar_vec(0.7));
    const Vec fd = (m.basis(scalar_vec(0.7 + h)) - m.basis(scalar_vec(0.7 - h))) / (2 * h);
    CHECK(jb(0, 0) == doctest::Approx(fd[0]).epsilon(1e-7));
    CHECK(jb(1, 0) == doctest::Approx(fd[1]).epsilon(1e-7));
}

TEST_CASE("model construction validates its parts") {
    CHECK_THROWS_AS(quadratic_reward(0.0, -1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(quadratic_reward(2.0, 1.0, -1.0), ValidationError);
    RewardModel::Parts p;
    p.name = "broken";
    p.param_dim = 1;
    p.output_dim = 1;
    p.admissible = Box::interval(0.0, 1.0);
    CHECK_THROWS_AS(RewardModel{p}, ValidationError);
}

TEST_CASE("batch optimum matches the per-member map") {
    const RewardModel m = example_reward();
    const std::vector<double> theta{0.5, 2.0, -1.0, 4.0, 1e-9, 7.0, 3.0};
    std::vector<double> out(theta.size());
    m.guarded_optimum_batch(theta, theta.size(), out);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        CHECK(out[i] == m.guarded_optimum(scalar_vec(theta[i]))[0]);
    }
}
