#pragma once

#include <cstdint>
#include <random>

namespace dcee {

using Rng = std::mt19937_64;

// Independent sub-streams of one scenario seed. Each consumer owns its own
// stream so that changing, say, the ensemble size never shifts the noise
// sequence.
enum class Stream : std::uint64_t {
    Noise = 1,
    EnsembleInit = 2,
};

inline Rng make_stream(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x6463'6565u};
    return Rng(seq);
}

} // namespace dcee
