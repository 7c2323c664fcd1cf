// Seed splitting and counter-based draws.
//
// A run has one master seed. Named streams are derived from it so that adding
// or removing one consumer (say, an attacker) never shifts another's draws.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace zkpot::sim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::string_view name) {
    return splitmix64(master ^ fnv1a(name));
}

/// Mixes a stream seed with up to three counters into one 64-bit value.
constexpr std::uint64_t hash_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed ^ splitmix64(a));
    h = splitmix64(h ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
    return splitmix64(h ^ splitmix64(c + 0x85157AF5ULL));
}

/// Uniform in [0, 1) with 53 bits of precision.
constexpr double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

/// Uniform double in [lo, hi) taken from a 64-bit engine without going
/// through std::uniform_real_distribution, whose output is not portable.
inline double uniform(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * to_unit(eng());
}

/// Uniform integer in [0, n) by rejection; n must be positive.
inline std::uint64_t uniform_index(std::mt19937_64& eng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

}  // namespace zkpot::sim
