#pragma once

#include <array>
#include <cstdint>

namespace dthp {

// Counter-based splitmix64: output k of the stream seeded with `state`.
// Used both as the seed-derivation function for replicate streams and to
// expand a single 64-bit seed into xoshiro256** state.
constexpr std::uint64_t splitmix64_at(std::uint64_t state, std::uint64_t k) noexcept {
    std::uint64_t z = state + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed for replicate `index` under `master`. Streams for distinct indices are
// independent draws from the splitmix64 sequence; replicate r always gets the
// same seed regardless of worker count or evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64_at(master, index);
}

// xoshiro256** 1.0. State expanded from a 64-bit seed via splitmix64.
class Xoshiro256ss {
  public:
    explicit constexpr Xoshiro256ss(std::uint64_t seed) noexcept
        : s_{splitmix64_at(seed, 0), splitmix64_at(seed, 1), splitmix64_at(seed, 2),
             splitmix64_at(seed, 3)} {}

    constexpr std::uint64_t next() noexcept {
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

    // Uniform on [0,1) with 53 random bits: (x >> 11) * 2^-53.
    constexpr double uniform53() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_;
};

}  // namespace dthp
