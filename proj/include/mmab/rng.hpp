#pragma once

#include <cstdint>
#include <random>

// Deterministic randomness utilities.
//
// Two kinds of streams are used by the simulator:
//  - counter-based keyed draws (keyed_uniform): stateless, so the environment
//    can generate the one Bernoulli draw per (arm, slot) lazily without the
//    set of queried arms affecting determinism;
//  - per-player sequential streams (Rng over mt19937_64), seeded from
//    (master seed, run index, player index) so runs and players are
//    independent and replayable regardless of thread scheduling.

namespace mmab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform double in [0,1) determined entirely by (seed, a, b).
inline double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const std::uint64_t h = splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Sub-seed derivation; mixing each component separately avoids collisions
// between e.g. (seed=1, run=2) and (seed=2, run=1).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

// mt19937_64 is fully specified by the standard, so sequences are identical
// across compilers. Bounded draws use the fixed-point multiply reduction
// instead of std::uniform_int_distribution, whose mapping is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    void seed(std::uint64_t s) { engine_.seed(s); }

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    // Uniform double in [0,1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace mmab
