#pragma once

// Ensemble inner loops. Estimator parameters are stored structure-of-arrays:
// row j (parameter component j) holds that component for all n estimators
// contiguously, so every kernel streams across estimators.
//
// All variants evaluate the same floating-point expression tree per element
// and reduce in the same 4-lane striped order (lane = index mod 4, lanes
// combined as (l0 + l1) + (l2 + l3)). Results are therefore bit-identical
// across instruction sets, which is what keeps traces reproducible no matter
// which variant the dispatcher picks.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace dcee::simd {

enum class Isa { Scalar, Avx2, Neon };

inline constexpr std::size_t kReductionLanes = 4;

struct Kernels {
    Isa isa;
    std::string_view name;

    // out[i] = sum_j phi[j] * theta[j*n + i] - offset
    void (*project)(std::span<const double> theta, std::size_t n, std::span<const double> phi,
                    double offset, std::span<double> out);

    // theta[j*n + i] -= (rates[i] * resid[i]) * phi[j]
    void (*lms_update)(std::span<double> theta, std::size_t n, std::span<const double> phi,
                       std::span<const double> rates, std::span<const double> resid);

    // sum_i (x[i] - shift)
    double (*shifted_sum)(std::span<const double> x, double shift);

    // sum_i (x[i] - center)^2
    double (*squared_deviation)(std::span<const double> x, double center);

    // out[i] = scale / (floor > x[i] ? floor : x[i])
    void (*floored_reciprocal)(std::span<const double> x, double scale, double floor,
                               std::span<double> out);
};

const Kernels& scalar_kernels();

// Variants compiled into this build; nullptr when the target lacks them.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// True when the variant is compiled in and the running CPU supports it.
bool isa_supported(Isa isa);

// Kernel table used by the library. The first call picks the widest supported
// variant unless DCEE_SIMD=scalar|avx2|neon overrides it.
const Kernels& active();

const Kernels& kernels_for(Isa isa);
void set_active(Isa isa);

std::optional<Isa> parse_isa(std::string_view name);

} // namespace dcee::simd
