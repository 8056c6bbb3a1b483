// Compiled with -mavx2 only. FMA stays disabled so the per-element expression
// trees match the scalar reference exactly.
#include "dcee/simd/kernels.hpp"

#if defined(DCEE_HAVE_AVX2)

#include <immintrin.h>

#include <array>

namespace dcee::simd {
namespace {

constexpr std::size_t kWidth = 4;

void project(std::span<const double> theta, std::size_t n, std::span<const double> phi, double offset,
             std::span<double> out) {
    const std::size_t rows = phi.size();
    const std::size_t body = n - n % kWidth;
    const __m256d off = _mm256_set1_pd(offset);
    for (std::size_t i = 0; i < body; i += kWidth) {
        __m256d acc = _mm256_mul_pd(_mm256_set1_pd(phi[0]), _mm256_loadu_pd(theta.data() + i));
        for (std::size_t j = 1; j < rows; ++j) {
            const __m256d t = _mm256_loadu_pd(theta.data() + j * n + i);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(phi[j]), t));
        }
        _mm256_storeu_pd(out.data() + i, _mm256_sub_pd(acc, off));
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
        const __m256d p = _mm256_set1_pd(phi[j]);
        for (std::size_t i = 0; i < body; i += kWidth) {
            const __m256d g = _mm256_mul_pd(_mm256_loadu_pd(rates.data() + i), _mm256_loadu_pd(resid.data() + i));
            _mm256_storeu_pd(row + i, _mm256_sub_pd(_mm256_loadu_pd(row + i), _mm256_mul_pd(g, p)));
        }
        for (std::size_t i = body; i < n; ++i) {
            row[i] = row[i] - (rates[i] * resid[i]) * phi[j];
        }
    }
}

double finish(__m256d acc_v, std::span<const double> tail_terms) {
    std::array<double, kWidth> acc{};
    _mm256_storeu_pd(acc.data(), acc_v);
    for (std::size_t l = 0; l < tail_terms.size(); ++l) {
        acc[l] = acc[l] + tail_terms[l];
    }
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double shifted_sum(std::span<const double> x, double shift) {
    const std::size_t n = x.size();
    const std::size_t body = n - n % kWidth;
    const __m256d s = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += kWidth) {
        acc = _mm256_add_pd(acc, _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), s));
    }
    std::array<double, kWidth> tail{};
    for (std::size_t i = body; i < n; ++i) {
        tail[i - body] = x[i] - shift;
    }
    return finish(acc, std::span<const double>(tail.data(), n - body));
}

double squared_deviation(std::span<const double> x, double center) {
    const std::size_t n = x.size();
    const std::size_t body = n - n % kWidth;
    const __m256d c = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += kWidth) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), c);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    std::array<double, kWidth> tail{};
    for (std::size_t i = body; i < n; ++i) {
        const double d = x[i] - center;
        tail[i - body] = d * d;
    }
    return finish(acc, std::span<const double>(tail.data(), n - body));
}

void floored_reciprocal(std::span<const double> x, double scale, double floor, std::span<double> out) {
    const std::size_t n = x.size();
    const std::size_t body = n - n % kWidth;
    const __m256d f = _mm256_set1_pd(floor);
    const __m256d sc = _mm256_set1_pd(scale);
    for (std::size_t i = 0; i < body; i += kWidth) {
        // max_pd(a, b) is (a > b ? a : b), matching the scalar NaN behaviour.
        const __m256d d = _mm256_max_pd(f, _mm256_loadu_pd(x.data() + i));
        _mm256_storeu_pd(out.data() + i, _mm256_div_pd(sc, d));
    }
    for (std::size_t i = body; i < n; ++i) {
        out[i] = scale / (floor > x[i] ? floor : x[i]);
    }
}

constexpr Kernels kAvx2{
    Isa::Avx2, "avx2", project, lms_update, shifted_sum, squared_deviation, floored_reciprocal,
};

} // namespace

const Kernels* avx2_kernels() { return &kAvx2; }

} // namespace dcee::simd

#else

namespace dcee::simd {
const Kernels* avx2_kernels() { return nullptr; }
} // namespace dcee::simd

#endif
