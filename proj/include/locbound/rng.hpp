#pragma once

#include <cstdint>

namespace locbound {

/// Stateless 64-bit avalanche (splitmix64 finalizer).
constexpr std::uint64_t hash64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/**
 * Deterministic counter-based random stream (splitmix64 core).
 *
 * A stream is fully determined by (master_seed, stream_index); draws depend
 * on no global state, so disjoint streams can be evaluated from any thread
 * in any order and always reproduce bit-identically. Stream index k of a
 * simulation run is the trial index, which makes every trial independently
 * addressable regardless of execution order or worker count.
 */
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
        : state_(hash64(master_seed) ^ hash64(stream_index ^ 0x6A09E667F3BCC909ull)) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

} // namespace locbound
