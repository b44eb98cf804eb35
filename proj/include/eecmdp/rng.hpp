#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace eecmdp {

// splitmix64 finalizer; used to derive independent, reproducible RNG
// streams from (master seed, tags). Every random draw in the project
// flows through a stream derived this way, so results depend only on
// the scenario seed and not on evaluation order or worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

// Stream tags, kept in one place so no two subsystems collide.
namespace stream {
inline constexpr std::uint64_t geometry = 0x67656f6dULL;   // UT placement + shadow draws
inline constexpr std::uint64_t table_cell = 0x7461626cULL; // per (state, action) MC cell
inline constexpr std::uint64_t rollout = 0x726f6c6cULL;    // test rollouts
} // namespace stream

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
    return std::mt19937_64(derive_seed(master, a, b, c));
}

// Distribution transforms are written out by hand because the std::
// distribution objects are implementation-defined; these keep every
// sampled byte identical across standard libraries.
inline double unit_uniform(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53; // [0, 1)
}

inline double exponential_draw(std::mt19937_64& g, double mean) {
    return -mean * std::log1p(-unit_uniform(g));
}

// One standard normal via Box-Muller; the spare is discarded so a draw
// always consumes exactly two words of the stream.
inline double normal_draw(std::mt19937_64& g) {
    double u1 = 1.0 - unit_uniform(g); // (0, 1]
    double u2 = unit_uniform(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

} // namespace eecmdp
