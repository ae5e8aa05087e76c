// 128-bit keyed window fingerprints. Equal inputs and seeds always produce
// equal values, across processes, runs and platforms.
#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

namespace decontam {

struct Fingerprint {
    // Interpreted as the 128-bit value hi * 2^64 + lo.
    uint64_t hi = 0;
    uint64_t lo = 0;

    friend constexpr auto operator<=>(const Fingerprint& a,
                                      const Fingerprint& b) {
        if (auto c = a.hi <=> b.hi; c != 0) return c;
        return a.lo <=> b.lo;
    }
    friend constexpr bool operator==(const Fingerprint&,
                                     const Fingerprint&) = default;
};

// MurmurHash3 x64/128 of the byte sequence.
Fingerprint fingerprint_bytes(std::string_view bytes, uint64_t seed);

// Fingerprint of a window of normalized characters (hashed over the
// window's UTF-8 encoding).
Fingerprint fingerprint_window(std::u32string_view window, uint64_t seed);

// Stable 64-bit hash for seed derivation and identifier hashing.
uint64_t stable_hash64(std::string_view bytes, uint64_t seed = 0);

}  // namespace decontam
