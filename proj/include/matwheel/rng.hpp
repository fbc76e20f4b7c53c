#pragma once

#include <cmath>
#include <cstdint>

namespace matwheel {

/// splitmix64 (Vigna). Used for seed expansion and hash mixing.
/// Integer-only, so results are identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// One-shot splitmix64 of a value.
inline std::uint64_t splitmix64_hash(std::uint64_t v) {
    return splitmix64(v);
}

/// Order-sensitive 64-bit combiner built on splitmix64.
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    std::uint64_t s = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    return splitmix64(s);
}

/// xoshiro256** 1.0 (Blackman & Vigna), seeded via splitmix64.
///
/// This is the project's only random source. All shuffles, subsampling,
/// parameter initialization, KDE draws and latent draws go through it,
/// which makes every randomized operation a pure function of its seed.
/// The integer stream (next_u64 / below / uniform) is bit-identical
/// across platforms; normal() additionally goes through libm (log/cos)
/// and is therefore identical across runs on one platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, bound). bound must be >= 1.
    /// Lemire multiply-reject, fixed algorithm for cross-platform stability.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal draw via Box-Muller (no cached spare, so the
    /// mapping draw index -> uniform pair is fixed).
    double normal() {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

/// In-place Fisher-Yates shuffle driven by an Rng. Integer-only.
template <typename Container>
void shuffle(Container& c, Rng& rng) {
    const std::size_t n = c.size();
    if (n < 2) return;
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        using std::swap;
        swap(c[i], c[j]);
    }
}

} // namespace matwheel
