#include "dcee/simd/kernels.hpp"

#include <array>

namespace dcee::simd {
namespace {

void project(std::span<const double> theta, std::size_t n, std::span<const double> phi, double offset,
             std::span<double> out) {
    const std::size_t rows = phi.size();
    for (std::size_t i = 0; i < n; ++i) {
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
    for (std::size_t j = 0; j < rows; ++j) {
        double* row = theta.data() + j * n;
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = row[i] - (rates[i] * resid[i]) * phi[j];
        }
    }
}

double combine(const std::array<double, kReductionLanes>& acc) { return (acc[0] + acc[1]) + (acc[2] + acc[3]); }

double shifted_sum(std::span<const double> x, double shift) {
    std::array<double, kReductionLanes> acc{};
    const std::size_t n = x.size();
    const std::size_t body = n - n % kReductionLanes;
    for (std::size_t i = 0; i < body; i += kReductionLanes) {
        for (std::size_t l = 0; l < kReductionLanes; ++l) {
            acc[l] = acc[l] + (x[i + l] - shift);
        }
    }
    for (std::size_t i = body; i < n; ++i) {
        acc[i - body] = acc[i - body] + (x[i] - shift);
    }
    return combine(acc);
}

double squared_deviation(std::span<const double> x, double center) {
    std::array<double, kReductionLanes> acc{};
    const std::size_t n = x.size();
    const std::size_t body = n - n % kReductionLanes;
    for (std::size_t i = 0; i < body; i += kReductionLanes) {
        for (std::size_t l = 0; l < kReductionLanes; ++l) {
            const double d = x[i + l] - center;
            acc[l] = acc[l] + d * d;
        }
    }
    for (std::size_t i = body; i < n; ++i) {
        const double d = x[i] - center;
        acc[i - body] = acc[i - body] + d * d;
    }
    return combine(acc);
}

void floored_reciprocal(std::span<const double> x, double scale, double floor, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = scale / (floor > x[i] ? floor : x[i]);
    }
}

constexpr Kernels kScalar{
    Isa::Scalar, "scalar", project, lms_update, shifted_sum, squared_deviation, floored_reciprocal,
};

} // namespace

const Kernels& scalar_kernels() { return kScalar; }

} // namespace dcee::simd
