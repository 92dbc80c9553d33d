#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace isilab::rng {

// splitmix64 finalizer; used to turn (seed, path) tuples into stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t id : path) h = mix64(h ^ mix64(id));
    return h;
}

// One independent pseudorandom stream. The engine is mt19937_64 (fully
// specified by the standard) and every conversion to doubles is coded here,
// so a given seed produces bit-identical draws on any platform.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal, Box-Muller. Consumes two uniforms per draw; no cached
    // half, so the draw sequence depends only on the call count.
    double next_gaussian() {
        double u = 1.0 - next_double();  // (0, 1], keeps the log finite
        double v = next_double();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(two_pi_ * v);
    }

    // Equiprobable BPSK symbol.
    double next_symbol() { return (engine_() & 1ULL) ? 1.0 : -1.0; }

    // Uniform integer in [0, n); multiply-shift, no modulo bias worth caring
    // about at 64 bits.
    int next_index(int n) {
        return static_cast<int>(
            (static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(n)) >> 64);
    }

private:
    static constexpr double two_pi_ = 6.283185307179586476925286766559;
    std::mt19937_64 engine_;
};

inline Stream stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Stream(derive(seed, path));
}

}  // namespace isilab::rng
