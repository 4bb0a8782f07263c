#pragma once

// Seed derivation and counter-based draws used by the simulation harness.
//
// Every stream in the project is derived from a single 64-bit base seed via
// mix_seed(), so adding trials or sub-streams never perturbs existing ones.

#include <cstdint>
#include <random>

namespace hypsel {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// seed_i = mix_seed(base, i). Fixed, published mixing: two SplitMix64 rounds
// over the base seed and the stream index.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(base) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

// Maps a 64-bit word onto [0, bound) by multiply-shift. Bias is below
// bound / 2^64, negligible for the small bounds used here.
constexpr std::uint32_t scale_to(std::uint64_t word, std::uint32_t bound) noexcept {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(word) * bound) >> 64);
}

// Uniform draw in [0, bound) addressed by (seed, counter); no hidden state,
// so any round can be regenerated independently.
constexpr std::uint32_t counter_draw(std::uint64_t seed, std::uint64_t counter,
                                     std::uint32_t bound) noexcept {
    return scale_to(mix_seed(seed, counter), bound);
}

}  // namespace hypsel
