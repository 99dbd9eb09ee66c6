#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

namespace ndtherm {

// splitmix64, used to mix stream keys into well-separated engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key_a, std::uint64_t key_b) {
    std::uint64_t state = seed;
    std::uint64_t out = splitmix64(state);
    state ^= key_a;
    out ^= splitmix64(state);
    state ^= key_b;
    out ^= splitmix64(state);
    return out;
}

/// Deterministic Gaussian stream on top of mt19937_64. Uniforms come from
/// the raw 64-bit engine output and the normal transform is a fixed
/// Box-Muller, so the draw sequence does not depend on the standard
/// library's distribution implementations.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {
        // 53 random mantissa bits, in [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0)
            u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ndtherm
