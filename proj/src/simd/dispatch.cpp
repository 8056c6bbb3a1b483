#include "dcee/error.hpp"
#include "dcee/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dcee::simd {
namespace {

const Kernels* compiled(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return &scalar_kernels();
    case Isa::Avx2:
        return avx2_kernels();
    case Isa::Neon:
        return neon_kernels();
    }
    return nullptr;
}

bool cpu_has(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const Kernels* pick_default() {
    if (const char* env = std::getenv("DCEE_SIMD")) {
        const auto isa = parse_isa(env);
        if (!isa || !isa_supported(*isa)) {
            throw ValidationError(std::string("DCEE_SIMD=") + env + " is not available on this machine");
        }
        return compiled(*isa);
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (isa_supported(isa)) {
            return compiled(isa);
        }
    }
    return &scalar_kernels();
}

std::atomic<const Kernels*>& slot() {
    static std::atomic<const Kernels*> current{pick_default()};
    return current;
}

} // namespace

bool isa_supported(Isa isa) { return compiled(isa) != nullptr && cpu_has(isa); }

const Kernels& active() { return *slot().load(std::memory_order_acquire); }

const Kernels& kernels_for(Isa isa) {
    if (!isa_supported(isa)) {
        throw ValidationError("requested SIMD variant is not supported on this machine");
    }
    return *compiled(isa);
}

void set_active(Isa isa) { slot().store(&kernels_for(isa), std::memory_order_release); }

std::optional<Isa> parse_isa(std::string_view name) {
    if (name == "scalar") {
        return Isa::Scalar;
    }
    if (name == "avx2") {
        return Isa::Avx2;
    }
    if (name == "neon") {
        return Isa::Neon;
    }
    return std::nullopt;
}

} // namespace dcee::simd
