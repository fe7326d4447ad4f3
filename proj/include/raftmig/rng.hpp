#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace raftmig {

// SplitMix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Named substreams. Every source of randomness in the project draws from a
// stream derived as derive_seed(base_seed, tag [, salt]); two streams with
// different tags never share state.
enum class StreamTag : std::uint64_t {
    Topology = 1,
    Environment = 2,
    NetInit = 3,
    Exploration = 4,
    BufferSampling = 5,
    Refinement = 6,
    BaselinePolicy = 7,
    Evaluation = 8,
};

inline std::uint64_t derive_seed(std::uint64_t base, StreamTag tag, std::uint64_t salt = 0) {
    std::uint64_t x = splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(tag)));
    return salt == 0 ? x : splitmix64(x ^ splitmix64(salt));
}

// Deterministic generator with hand-rolled distributions so that sequences do
// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi] inclusive, rejection-sampled (no modulo bias).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(gen_()); // full 64-bit range
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    // Marsaglia polar method; the spare deviate is discarded so every call
    // consumes a self-contained portion of the stream.
    double gaussian(double mean, double stddev) {
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return mean + stddev * u * std::sqrt(-2.0 * std::log(s) / s);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace raftmig
