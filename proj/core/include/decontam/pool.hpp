// The substring pool: every unique sliding window of every normalized
// test-set example, stored as sorted 128-bit fingerprints. Test examples too
// short to produce a window are kept whole as "short entries" and matched by
// containment instead. Immutable once built; safe for concurrent readers.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decontam/fingerprint.hpp"
#include "decontam/multi_pattern.hpp"
#include "decontam/normalize.hpp"

namespace decontam {

inline constexpr uint32_t kDefaultWindowSize = 50;
inline constexpr uint32_t kMinWindowSize = 8;
inline constexpr uint64_t kDefaultFingerprintSeed = 0x5eedfeed2024dcf1ULL;

struct PoolConfig {
    // Window size S in normalized characters; the stride is always 1.
    uint32_t window_size = kDefaultWindowSize;
    // Fixed keyed-hash seed so pools are reproducible across builds.
    uint64_t fingerprint_seed = kDefaultFingerprintSeed;
    // Audit mode: additionally retain the exact window strings. In-memory
    // only; not serialized.
    bool keep_exact_windows = false;

    friend bool operator==(const PoolConfig& a, const PoolConfig& b) {
        return a.window_size == b.window_size &&
               a.fingerprint_seed == b.fingerprint_seed;
    }
};

struct TestSet {
    std::string name;
    std::vector<std::string> examples;  // raw UTF-8, one per test example
};

struct BenchmarkProvenance {
    std::string name;
    uint64_t example_count = 0;
    uint64_t window_count = 0;  // windows contributed, before dedup
};

struct ShortEntry {
    std::u32string text;  // normalized, length in [1, S)
    uint16_t owner = 0;   // index into provenance
};

// Number of sliding windows in a text of `len` normalized characters.
inline uint64_t window_count(uint64_t len, uint32_t window_size) {
    return len >= window_size ? len - window_size + 1 : 0;
}

// Enumerates every window of `text` as (start, view) without materializing.
void for_each_window(
    std::u32string_view text, uint32_t window_size,
    const std::function<void(uint32_t, std::u32string_view)>& fn);

class SubstringPool {
public:
    const PoolConfig& config() const { return config_; }
    uint32_t window_size() const { return config_.window_size; }

    const std::vector<Fingerprint>& fingerprints() const {
        return fingerprints_;
    }
    const std::vector<ShortEntry>& short_entries() const {
        return short_entries_;
    }
    const std::vector<BenchmarkProvenance>& provenance() const {
        return provenance_;
    }
    uint64_t total_windows_seen() const { return total_windows_seen_; }

    bool contains(const Fingerprint& fp) const;
    // Throws std::invalid_argument unless window.size() == window_size().
    bool contains(std::u32string_view window) const;

    // Benchmark index that first contributed the fingerprint, or -1.
    int32_t owner_of(const Fingerprint& fp) const;

    // Automaton over all short entries; empty automaton when there are none.
    const MultiPatternMatcher& short_entry_matcher() const { return matcher_; }
    uint16_t short_entry_owner(uint32_t pattern_index) const {
        return short_entries_[pattern_index].owner;
    }

    // Audit mode. exact_contains answers from the retained window strings.
    bool has_exact_windows() const { return !exact_windows_.empty(); }
    bool exact_contains(std::u32string_view window) const;
    const std::vector<std::u32string>& exact_windows() const {
        return exact_windows_;
    }

private:
    friend SubstringPool build_pool(const std::vector<TestSet>&,
                                    const PoolConfig&);
    friend SubstringPool merge_pools(const SubstringPool&,
                                     const SubstringPool&);
    friend SubstringPool load_pool(const std::filesystem::path&);
    friend void save_pool(const SubstringPool&, const std::filesystem::path&);

    void finalize();  // sorts, dedups, builds the short-entry automaton

    PoolConfig config_;
    std::vector<Fingerprint> fingerprints_;      // sorted ascending, unique
    std::vector<uint16_t> owners_;               // parallel to fingerprints_
    std::vector<ShortEntry> short_entries_;      // sorted by text, unique
    std::vector<BenchmarkProvenance> provenance_;
    uint64_t total_windows_seen_ = 0;
    std::vector<std::u32string> exact_windows_;  // sorted, audit mode only
    MultiPatternMatcher matcher_;
};

// Throws ConfigError when `test_sets` is empty or the config is invalid.
SubstringPool build_pool(const std::vector<TestSet>& test_sets,
                         const PoolConfig& config);

// Union of two pools built with the same config; provenance is concatenated.
// Throws ConfigError on config mismatch.
SubstringPool merge_pools(const SubstringPool& a, const SubstringPool& b);

// Binary pool file, little-endian. Layout:
//   magic "DPL1" | version u16 | window_size u16 | fingerprint_seed u64 |
//   fingerprint count u64 | fingerprints (count x 16 bytes, ascending) |
//   short-entry count u32 | entries (u16 byte-length + UTF-8) |
//   provenance JSON blob (u32 byte-length + bytes)
// The JSON blob also carries total_windows_seen and per-fingerprint owner
// attribution so reports can break hits down by benchmark.
void save_pool(const SubstringPool& pool, const std::filesystem::path& path);
SubstringPool load_pool(const std::filesystem::path& path);

}  // namespace decontam
