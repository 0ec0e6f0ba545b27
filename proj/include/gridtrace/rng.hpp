#pragma once

#include <cmath>
#include <cstdint>

namespace gridtrace {

// splitmix64; stable across platforms, unlike std:: distributions.
inline std::uint64_t hash_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return hash_mix(seed ^ (v + 0x9e3779b97f4a7c15ULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1].
    double uniform01_open_low() { return 1.0 - uniform01(); }

    // Uniform on [0, n); n > 0. Rejection sampling keeps it unbiased.
    std::uint64_t uniform_index(std::uint64_t n) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    double normal() {
        // Box-Muller; one value per call, cache unused.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01_open_low();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gridtrace
