#pragma once

// Counter-based deterministic randomness. Every draw is a pure function of
// (seed, stream, counter), so results do not depend on iteration order or
// on the standard library's distribution implementations.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace mtct {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn stream labels into 64-bit keys.
inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

class CounterRng {
  public:
    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}
    constexpr CounterRng(std::uint64_t seed, std::string_view stream) noexcept : CounterRng(seed, fnv1a(stream)) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return splitmix64(key_ ^ splitmix64(counter));
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    constexpr double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, bound) by rejection; bound > 0.
    constexpr std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t sub = 0;
        for (;;) {
            const std::uint64_t v = splitmix64(bits(counter) + sub);
            if (v < limit)
                return v % bound;
            ++sub;
        }
    }

    /// Derives an independent generator, e.g. for a named sub-seed.
    constexpr CounterRng derive(std::string_view label) const noexcept { return CounterRng(key_, label); }

    constexpr std::uint64_t key() const noexcept { return key_; }

  private:
    std::uint64_t key_;
};

/// Fisher-Yates shuffle driven by a counter-based generator.
template <typename T> void seeded_shuffle(std::vector<T> &items, const CounterRng &rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i - 1, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace mtct
