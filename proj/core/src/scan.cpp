#include "decontam/scan.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "decontam/errors.hpp"
#include "decontam/unicode.hpp"

namespace decontam {

namespace {

constexpr uint64_t kDocIdHashSalt = 0x0dc0ffee0dc0ffeeULL;

// Unbiased bounded draw. std::mt19937_64 has a standard-mandated sequence;
// std::uniform_int_distribution does not, so roll the reduction by hand.
uint64_t uniform_below(std::mt19937_64& rng, uint64_t bound) {
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

struct Run {
    uint32_t first;  // first window start of the contaminated run
    uint32_t last;   // last window start (inclusive)
    Fingerprint anchor;  // fingerprint of the window that hit first
};

std::string slice_utf8(const std::u32string& original, uint64_t begin,
                       uint64_t end) {
    return uni::encode_utf8(
        std::u32string_view(original).substr(begin, end - begin));
}

}  // namespace

std::vector<uint32_t> sample_positions(uint64_t windows_available, uint32_t n,
                                       uint64_t seed) {
    std::vector<uint32_t> out;
    if (windows_available <= n) {
        out.reserve(windows_available);
        for (uint64_t i = 0; i < windows_available; ++i) {
            out.push_back(static_cast<uint32_t>(i));
        }
        return out;
    }
    if (n == 0) return out;

    // Floyd's algorithm: n distinct positions, uniform without replacement.
    std::mt19937_64 rng(seed);
    std::set<uint64_t> chosen;
    for (uint64_t j = windows_available - n; j < windows_available; ++j) {
        uint64_t t = uniform_below(rng, j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    out.reserve(chosen.size());
    for (uint64_t p : chosen) out.push_back(static_cast<uint32_t>(p));
    return out;
}

uint64_t derive_doc_seed(uint64_t global_seed, std::string_view doc_id) {
    return global_seed ^ stable_hash64(doc_id, kDocIdHashSalt);
}

ContaminationVerdict check_document(std::string_view doc_id,
                                    std::string_view raw_utf8,
                                    const SubstringPool& pool,
                                    const ScanConfig& config) {
    if (config.sample_count < 1) {
        throw ConfigError("scan: sample_count must be >= 1");
    }

    ContaminationVerdict verdict;
    verdict.doc_id = std::string(doc_id);

    std::u32string original = uni::decode_utf8(raw_utf8);
    NormalizedText norm = normalize(std::u32string_view(original));
    const uint32_t S = pool.window_size();
    const uint64_t seed = derive_doc_seed(config.global_seed, doc_id);

    verdict.windows_available = window_count(norm.text.size(), S);
    verdict.skipped_too_short = norm.text.size() < S;

    auto window_at = [&](uint64_t start) {
        return std::u32string_view(norm.text).substr(start, S);
    };
    auto hit_at = [&](uint64_t start, Fingerprint* fp_out = nullptr) {
        Fingerprint fp =
            fingerprint_window(window_at(start), pool.config().fingerprint_seed);
        if (fp_out) *fp_out = fp;
        return pool.contains(fp);
    };

    // Window probing.
    std::vector<Run> runs;
    if (verdict.windows_available > 0) {
        std::vector<uint32_t> positions;
        if (config.mode == ScanMode::kSampled) {
            positions = sample_positions(verdict.windows_available,
                                         config.sample_count, seed);
            verdict.sampled_positions = positions;
        } else {
            positions.reserve(verdict.windows_available);
            for (uint64_t i = 0; i < verdict.windows_available; ++i) {
                positions.push_back(static_cast<uint32_t>(i));
            }
        }

        for (uint32_t pos : positions) {
            ++verdict.windows_tested;
            if (!runs.empty() && pos >= runs.back().first &&
                pos <= runs.back().last) {
                // Already inside a known contaminated run.
                ++verdict.window_probe_hits;
                continue;
            }
            Fingerprint fp;
            if (!hit_at(pos, &fp)) continue;
            ++verdict.window_probe_hits;

            // Grow the hit into the maximal run of pool windows around it,
            // so the evidence span covers the whole copied region rather
            // than one 50-character window.
            uint32_t lo = pos;
            while (lo > 0 && (runs.empty() || lo - 1 > runs.back().last) &&
                   hit_at(lo - 1)) {
                --lo;
            }
            uint32_t hi = pos;
            while (hi + 1 < verdict.windows_available && hit_at(hi + 1)) {
                ++hi;
            }
            if (!runs.empty() && lo <= runs.back().last + 1) {
                // Touches the previous run; extend it.
                runs.back().last = std::max(runs.back().last, hi);
            } else {
                runs.push_back(Run{lo, hi, fp});
            }
        }
    }

    // Short-entry containment scan over the whole normalized text.
    struct ShortHit {
        uint32_t start, end;
        uint16_t owner;
    };
    std::vector<ShortHit> short_hits;
    const MultiPatternMatcher& matcher = pool.short_entry_matcher();
    if (matcher.pattern_count() > 0 && !norm.text.empty()) {
        matcher.find_all(norm.text, [&](const MultiPatternMatcher::Occurrence& o) {
            ++verdict.short_entry_hits;
            short_hits.push_back(
                {o.start, o.end, pool.short_entry_owner(o.pattern)});
        });
        std::sort(short_hits.begin(), short_hits.end(),
                  [](const ShortHit& a, const ShortHit& b) {
                      if (a.start != b.start) return a.start < b.start;
                      return a.end < b.end;
                  });
        // Coalesce overlapping occurrences.
        std::vector<ShortHit> merged;
        for (const ShortHit& hit : short_hits) {
            if (!merged.empty() && hit.start <= merged.back().end) {
                merged.back().end = std::max(merged.back().end, hit.end);
            } else {
                merged.push_back(hit);
            }
        }
        short_hits = std::move(merged);
    }

    auto benchmark_name = [&](int32_t owner) -> std::string {
        if (owner < 0 ||
            static_cast<std::size_t>(owner) >= pool.provenance().size()) {
            return {};
        }
        return pool.provenance()[owner].name;
    };

    auto add_match = [&](uint32_t nstart, uint32_t nend, MatchSource source,
                         std::string benchmark) {
        auto [ostart, oend] = map_span_to_original(norm, nstart, nend);
        MatchSpan span;
        span.normalized_start = nstart;
        span.normalized_end = nend;
        span.original_start = ostart;
        span.original_end = oend;
        span.source = source;
        span.benchmark = std::move(benchmark);

        uint64_t ctx = config.evidence_context_chars;
        uint64_t before = ostart > ctx ? ostart - ctx : 0;
        uint64_t after = std::min<uint64_t>(original.size(), oend + ctx);
        span.evidence_before = slice_utf8(original, before, ostart);
        span.evidence_after = slice_utf8(original, oend, after);
        if (oend - ostart > config.max_evidence_chars &&
            config.max_evidence_chars >= 2) {
            uint64_t head = config.max_evidence_chars / 2;
            uint64_t tail = config.max_evidence_chars - head;
            span.evidence_text = slice_utf8(original, ostart, ostart + head) +
                                 "\xE2\x80\xA6" +  // ellipsis
                                 slice_utf8(original, oend - tail, oend);
        } else {
            span.evidence_text = slice_utf8(original, ostart, oend);
        }
        verdict.matches.push_back(std::move(span));
    };

    for (const Run& run : runs) {
        add_match(run.first, run.last + S, MatchSource::kWindow,
                  benchmark_name(pool.owner_of(run.anchor)));
    }
    for (const ShortHit& hit : short_hits) {
        add_match(hit.start, hit.end, MatchSource::kShortEntry,
                  benchmark_name(hit.owner));
    }
    std::sort(verdict.matches.begin(), verdict.matches.end(),
              [](const MatchSpan& a, const MatchSpan& b) {
                  if (a.normalized_start != b.normalized_start) {
                      return a.normalized_start < b.normalized_start;
                  }
                  return a.normalized_end < b.normalized_end;
              });

    verdict.contaminated = !verdict.matches.empty();
    return verdict;
}

double detection_probability(uint64_t windows_available,
                             uint64_t contaminated_windows, uint32_t n) {
    if (contaminated_windows > windows_available) {
        throw std::invalid_argument(
            "detection_probability: contaminated_windows > windows_available");
    }
    if (n < 1) {
        throw std::invalid_argument("detection_probability: n must be >= 1");
    }
    if (contaminated_windows == 0) return 0.0;

    uint64_t draws = std::min<uint64_t>(n, windows_available);
    uint64_t clean = windows_available - contaminated_windows;
    if (clean < draws) return 1.0;  // every possible draw includes a hit

    // log [ C(clean, draws) / C(W, draws) ]
    double log_miss = 0.0;
    for (uint64_t i = 0; i < draws; ++i) {
        log_miss += std::log(static_cast<double>(clean - i)) -
                    std::log(static_cast<double>(windows_available - i));
    }
    return 1.0 - std::exp(log_miss);
}

}  // namespace decontam
