// Per-document contamination decisions. Sampled mode probes N random
// windows (the production path); exhaustive mode checks every window and
// serves as the oracle. Verdicts are pure functions of (doc_id, text, pool,
// config), independent of scan order and worker count.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "decontam/pool.hpp"

namespace decontam {

inline constexpr uint32_t kDefaultSampleCount = 10;

enum class ScanMode { kSampled, kExhaustive };

struct ScanConfig {
    uint32_t sample_count = kDefaultSampleCount;  // N
    uint64_t global_seed = 0;
    ScanMode mode = ScanMode::kSampled;
    // Original-text characters captured on each side of an evidence span.
    uint32_t evidence_context_chars = 40;
    // Evidence spans longer than this are middle-elided in the captured text
    // (the span offsets stay exact).
    uint32_t max_evidence_chars = 4096;
};

enum class MatchSource { kWindow, kShortEntry };

struct MatchSpan {
    uint32_t normalized_start = 0;
    uint32_t normalized_end = 0;
    uint32_t original_start = 0;
    uint32_t original_end = 0;
    MatchSource source = MatchSource::kWindow;
    std::string benchmark;        // first contributor of the matched content
    std::string evidence_before;  // original text, UTF-8
    std::string evidence_text;
    std::string evidence_after;
};

struct ContaminationVerdict {
    std::string doc_id;
    bool contaminated = false;
    // Maximal contaminated runs; overlapping hits are coalesced so a fully
    // copied passage reports as one span.
    std::vector<MatchSpan> matches;
    std::vector<uint32_t> sampled_positions;  // empty in exhaustive mode
    uint64_t windows_available = 0;           // max(0, L - S + 1)
    bool skipped_too_short = false;
    // Probe counters (pre-coalescing), for aggregate reporting.
    uint32_t windows_tested = 0;
    uint32_t window_probe_hits = 0;
    uint32_t short_entry_hits = 0;
};

// Uniform sample of distinct window start positions, sorted ascending.
// Returns all positions when windows_available <= n. Deterministic for a
// fixed seed on every platform.
std::vector<uint32_t> sample_positions(uint64_t windows_available, uint32_t n,
                                       uint64_t seed);

// Per-document seed: global seed xor a stable hash of the document id, so
// verdicts do not depend on scan order or parallelism.
uint64_t derive_doc_seed(uint64_t global_seed, std::string_view doc_id);

ContaminationVerdict check_document(std::string_view doc_id,
                                    std::string_view raw_utf8,
                                    const SubstringPool& pool,
                                    const ScanConfig& config);

// P(at least one of `contaminated_windows` marked windows is picked when
// drawing min(n, windows_available) windows uniformly without replacement).
// Throws std::invalid_argument on inconsistent counts.
double detection_probability(uint64_t windows_available,
                             uint64_t contaminated_windows, uint32_t n);

}  // namespace decontam
