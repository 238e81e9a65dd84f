#pragma once

#include <cstdint>

#include "adhocnet/bytes.hpp"

namespace adhocnet {

// splitmix64: 64-bit-state PRNG used everywhere randomness must be
// replayable. The sequence is a fixed part of the simulation contract so
// tests can reproduce delivery traces by replaying the stream offline.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), from the top 53 bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform integer in [0, bound). bound must be nonzero. Modulo reduction:
    // bias is irrelevant at the bounds used here and keeps replay trivial.
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

    void fill(std::uint8_t* out, std::size_t n) {
        std::size_t i = 0;
        while (i < n) {
            std::uint64_t v = next_u64();
            for (int s = 56; s >= 0 && i < n; s -= 8) out[i++] = static_cast<std::uint8_t>(v >> s);
        }
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out.data(), n);
        return out;
    }

    // Derives an independent child stream; used to give each node its own
    // single-consumer stream from one scenario seed.
    SplitMix64 fork() { return SplitMix64(next_u64()); }

private:
    std::uint64_t state_;
};

}  // namespace adhocnet
