// AArch64 variant. Two 2-wide registers carry the four reduction lanes.
#include "dcee/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <array>

namespace dcee::simd {
namespace {

constexpr std::size_t kWidth = 2;

void project(std::span<const double> theta, std::size_t n, std::span<const double> phi, double offset,
             std::span<double> out) {
    const std::size_t rows = phi.size();
    const std::size_t body = n - n % kWidth;
    const float64x2_t off = vdupq_n_f64(offset);
    for (std::size_t i = 0; i < body; i += kWidth) {
        float64x2_t acc = vmulq_f64(vdupq_n_f64(phi[0]), vld1q_f64(theta.data() + i));
        for (std::size_t j = 1; j < rows; ++j) {
            acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(phi[j]), vld1q_f64(theta.data() + j * n + i)));
        }
        vst1q_f64(out.data() + i, vsubq_f64(acc, off));
    }
    for (std::size_t i = body; i < n; ++i) {
        double acc = phi[0] * theta[i];
        for (std::size_t j = 1; j < rows; ++j) {
            acc = acc + phi[j] * theta[j * n + i];
        }
        out[i] = acc - offset;
    }
}

void lms_update(std::span<double> theta, std::size_t n, std::span<const double> phi,
                std::span<const double> rates, std::span<const double> resid) {
    const std::size_t rows = phi.size();
    const std::size_t body = n - n % kWidth;
    for (std::size_t j = 0; j < rows; ++j) {
        double* row = theta.data() + j * n;
        const float64x2_t p = vdupq_n_f64(phi[j]);
        for (std::size_t i = 0; i < body; i += kWidth) {
            const float64x2_t g = vmulq_f64(vld1q_f64(rates.data() + i), vld1q_f64(resid.data() + i));
            vst1q_f64(row + i, vsubq_f64(vld1q_f64(row + i), vmulq_f64(g, p)));
        }
        for (std::size_t i = body; i < n; ++i) {
            row[i] = row[i] - (rates[i] * resid[i]) * phi[j];
        }
    }
}

template <class Term>
double striped(std::span<const double> x, Term term) {
    const std::size_t n = x.size();
    const std::size_t body = n - n % kReductionLanes;
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < body; i += kReductionLanes) {
        lo = vaddq_f64(lo, term(vld1q_f64(x.data() + i)));
        hi = vaddq_f64(hi, term(vld1q_f64(x.data() + i + 2)));
    }
    std::array<double, kReductionLanes> acc{};
    vst1q_f64(acc.data(), lo);
    vst1q_f64(acc.data() + 2, hi);
    for (std::size_t i = body; i < n; ++i) {
        const float64x2_t t = term(vdupq_n_f64(x[i]));
        acc[i - body] = acc[i - body] + vgetq_lane_f64(t, 0);
    }
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double shifted_sum(std::span<const double> x, double shift) {
    const float64x2_t s = vdupq_n_f64(shift);
    return striped(x, [s](float64x2_t v) { return vsubq_f64(v, s); });
}

double squared_deviation(std::span<const double> x, double center) {
    const float64x2_t c = vdupq_n_f64(center);
    return striped(x, [c](float64x2_t v) {
        const float64x2_t d = vsubq_f64(v, c);
        return vmulq_f64(d, d);
    });
}

void floored_reciprocal(std::span<const double> x, double scale, double floor, std::span<double> out) {
    const std::size_t n = x.size();
    const std::size_t body = n - n % kWidth;
    const float64x2_t f = vdupq_n_f64(floor);
    const float64x2_t sc = vdupq_n_f64(scale);
    for (std::size_t i = 0; i < body; i += kWidth) {
        const float64x2_t v = vld1q_f64(x.data() + i);
        const float64x2_t d = vbslq_f64(vcgtq_f64(f, v), f, v);
        vst1q_f64(out.data() + i, vdivq_f64(sc, d));
    }
    for (std::size_t i = body; i < n; ++i) {
        out[i] = scale / (floor > x[i] ? floor : x[i]);
    }
}

constexpr Kernels kNeon{
    Isa::Neon, "neon", project, lms_update, shifted_sum, squared_deviation, floored_reciprocal,
};

} // namespace

const Kernels* neon_kernels() { return &kNeon; }

} // namespace dcee::simd

#else

namespace dcee::simd {
const Kernels* neon_kernels() { return nullptr; }
} // namespace dcee::simd

#endif
