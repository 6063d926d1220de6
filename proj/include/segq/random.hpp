#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace segq {

// Named substream of a 64-bit Mersenne Twister. The state is derived from
// (seed, stream id) through std::seed_seq, whose algorithm is fixed by the
// standard, so each stream is reproducible and independent of the others:
// drawing more from one stream never shifts another.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

// Stream ids used across the library.
namespace streams {
inline constexpr std::uint64_t arrivals = 1;
inline constexpr std::uint64_t services = 2;
inline constexpr std::uint64_t channel = 3;
inline constexpr std::uint64_t swarm = 4;
// Queue q of a network uses arrivals/services ids offset by this stride * (q + 1).
inline constexpr std::uint64_t network_stride = 16;
} // namespace streams

} // namespace segq
