#include "dcee/error.hpp"
#include "dcee/harness.hpp"
#include "dcee/simd/kernels.hpp"

#include "doctest.h"

#include <cstring>
#include <random>
#include <vector>

using namespace dcee;
namespace simd = dcee::simd;

namespace {

std::vector<const simd::Kernels*> wide_variants() {
    std::vector<const simd::Kernels*> out;
    for (simd::Isa isa : {simd::Isa::Avx2, simd::Isa::Neon}) {
        if (simd::isa_supported(isa)) {
            out.push_back(&simd::kernels_for(isa));
        }
    }
    return out;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -20.0, double hi = 20.0) {
    std::uniform_real_distribution<double> ud(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) {
        x = ud(rng);
    }
    return v;
}

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

} // namespace

TEST_CASE("parse_isa and support queries") {
    CHECK(simd::parse_isa("scalar") == simd::Isa::Scalar);
    CHECK(simd::parse_isa("avx2") == simd::Isa::Avx2);
    CHECK(simd::parse_isa("neon") == simd::Isa::Neon);
    CHECK_FALSE(simd::parse_isa("sse9").has_value());
    CHECK(simd::isa_supported(simd::Isa::Scalar));
    CHECK(simd::kernels_for(simd::Isa::Scalar).isa == simd::Isa::Scalar);
    MESSAGE("active SIMD variant: " << simd::active().name);
}

TEST_CASE("set_active switches the dispatch and rejects missing variants") {
    const simd::Isa original = simd::active().isa;
    simd::set_active(simd::Isa::Scalar);
    CHECK(simd::active().isa == simd::Isa::Scalar);
    for (simd::Isa isa : {simd::Isa::Avx2, simd::Isa::Neon}) {
        if (!simd::isa_supported(isa)) {
            CHECK_THROWS_AS(simd::set_active(isa), ValidationError);
        }
    }
    simd::set_active(original);
    CHECK(simd::active().isa == original);
}

TEST_CASE("scalar kernels against direct loops") {
    const auto& k = simd::scalar_kernels();
    const std::vector<double> theta{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const std::vector<double> phi{2.0, -1.0};
    std::vector<double> out(3);
    k.project(theta, 3, phi, 0.5, out);
    CHECK(out == std::vector<double>{2.0 - 4.0 - 0.5, 4.0 - 5.0 - 0.5, 6.0 - 6.0 - 0.5});

    std::vector<double> th = theta;
    const std::vector<double> rates{0.1, 0.2, 0.5};
    const std::vector<double> resid{1.0, -1.0, 2.0};
    k.lms_update(th, 3, phi, rates, resid);
    CHECK(th[0] == doctest::Approx(1.0 - 0.1 * 2.0));
    CHECK(th[5] == doctest::Approx(6.0 + 1.0 * 1.0));

    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(k.shifted_sum(x, 3.0) == 0.0);
    CHECK(k.squared_deviation(x, 3.0) == 10.0);
    std::vector<double> rec(5);
    k.floored_reciprocal(x, 2.0, 2.5, rec);
    CHECK(rec[0] == 0.8);
    CHECK(rec[4] == 0.4);
    CHECK(k.shifted_sum({}, 1.0) == 0.0);
}

TEST_CASE("wide kernels are bit-identical to scalar for every length") {
    const auto& s = simd::scalar_kernels();
    const auto variants = wide_variants();
    if (variants.empty()) {
        MESSAGE("no wide SIMD variant on this machine; scalar only");
    }
    std::mt19937_64 rng(123);
    for (const simd::Kernels* w : variants) {
        for (std::size_t n = 0; n <= 67; ++n) {
            for (std::size_t m : {1u, 2u, 6u}) {
                const auto theta = random_vec(n * m, rng);
                const auto phi = random_vec(m, rng, -3.0, 3.0);
                const auto rates = random_vec(n, rng, 1e-4, 1.0);
                const auto resid = random_vec(n, rng);
                const double offset = random_vec(1, rng)[0];

                std::vector<double> a(n), b(n);
                s.project(theta, n, phi, offset, a);
                w->project(theta, n, phi, offset, b);
                CHECK(bitwise_equal(a, b));

                std::vector<double> ta = theta, tb = theta;
                s.lms_update(ta, n, phi, rates, resid);
                w->lms_update(tb, n, phi, rates, resid);
                CHECK(bitwise_equal(ta, tb));

                const double shift = random_vec(1, rng)[0];
                CHECK(bitwise_equal(s.shifted_sum(theta, shift), w->shifted_sum(theta, shift)));
                CHECK(bitwise_equal(s.squared_deviation(theta, shift), w->squared_deviation(theta, shift)));

                std::vector<double> ra(n * m), rb(n * m);
                s.floored_reciprocal(theta, 2.0, 1e-6, ra);
                w->floored_reciprocal(theta, 2.0, 1e-6, rb);
                CHECK(bitwise_equal(ra, rb));
            }
        }
    }
}

TEST_CASE("wide kernels match scalar on awkward values") {
    const auto& s = simd::scalar_kernels();
    const std::vector<double> x{0.0, -0.0, 1e-300, -1e-300, 1e300, 5e-324, 1.0, 3.0, 1e-7};
    for (const simd::Kernels* w : wide_variants()) {
        std::vector<double> a(x.size()), b(x.size());
        s.floored_reciprocal(x, 2.0, 1e-6, a);
        w->floored_reciprocal(x, 2.0, 1e-6, b);
        CHECK(bitwise_equal(a, b));
        CHECK(bitwise_equal(s.squared_deviation(x, 0.5), w->squared_deviation(x, 0.5)));
    }
}

TEST_CASE("whole traces are identical under every kernel variant") {
    const simd::Isa original = simd::active().isa;
    ScenarioConfig lin = example_linear_config();
    lin.run.steps = 500;
    ScenarioConfig pv = default_mppt_config();
    pv.run.steps = 100;
    pv.ensemble.size = 30;
    simd::set_active(simd::Isa::Scalar);
    const Trace ref_lin = run_scenario(lin);
    const Trace ref_pv = run_scenario(pv);
    for (const simd::Kernels* w : wide_variants()) {
        simd::set_active(w->isa);
        const Trace t_lin = run_scenario(lin);
        const Trace t_pv = run_scenario(pv);
        for (std::size_t i = 0; i < ref_lin.records.size(); ++i) {
            REQUIRE(bitwise_equal(ref_lin.row(i), t_lin.row(i)));
        }
        for (std::size_t i = 0; i < ref_pv.records.size(); ++i) {
            REQUIRE(bitwise_equal(ref_pv.row(i), t_pv.row(i)));
        }
    }
    simd::set_active(original);
}
