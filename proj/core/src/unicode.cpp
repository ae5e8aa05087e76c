#include "decontam/unicode.hpp"

#include <algorithm>
#include <cassert>

#include "unicode_tables.hpp"

namespace decontam::uni {

namespace {

using namespace tables;

// Hangul syllable composition/decomposition constants (UAX #15 §3.12).
constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulLCount = 19;
constexpr int kHangulVCount = 21;
constexpr int kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;  // 588
constexpr int kHangulSCount = kHangulLCount * kHangulNCount;  // 11172

bool in_ranges(const CharRange* ranges, std::size_t count, char32_t cp) {
    const CharRange* end = ranges + count;
    const CharRange* it = std::upper_bound(
        ranges, end, cp,
        [](char32_t v, const CharRange& r) { return v < r.first; });
    return it != ranges && cp <= (it - 1)->last;
}

const DecompositionEntry* find_decomposition(char32_t cp) {
    const DecompositionEntry* end = kDecompositions + kDecompositionCount;
    const DecompositionEntry* it = std::lower_bound(
        kDecompositions, end, cp,
        [](const DecompositionEntry& e, char32_t v) { return e.cp < v; });
    return (it != end && it->cp == cp) ? it : nullptr;
}

// Canonical pair composition; 0 when the pair does not compose.
char32_t compose_pair(char32_t a, char32_t b) {
    // Hangul: L+V and LV+T compose algorithmically.
    if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount &&
        b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
        int l = static_cast<int>(a - kHangulLBase);
        int v = static_cast<int>(b - kHangulVBase);
        return kHangulSBase + (l * kHangulVCount + v) * kHangulTCount;
    }
    if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
        (a - kHangulSBase) % kHangulTCount == 0 &&
        b > kHangulTBase && b < kHangulTBase + kHangulTCount) {
        return a + (b - kHangulTBase);
    }
    uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
    const CompositionPair* end = kCompositionPairs + kCompositionPairCount;
    const CompositionPair* it = std::lower_bound(
        kCompositionPairs, end, key,
        [](const CompositionPair& p, uint64_t k) {
            return ((static_cast<uint64_t>(p.starter) << 32) | p.second) < k;
        });
    if (it != end && it->starter == a && it->second == b) return it->composed;
    return 0;
}

struct Piece {
    char32_t cp;
    uint32_t src;
};

void decompose_into(char32_t cp, uint32_t src, std::vector<Piece>& out) {
    if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
        int index = static_cast<int>(cp - kHangulSBase);
        out.push_back({kHangulLBase + index / kHangulNCount, src});
        out.push_back({kHangulVBase + (index % kHangulNCount) / kHangulTCount, src});
        int t = index % kHangulTCount;
        if (t != 0) out.push_back({kHangulTBase + t, src});
        return;
    }
    if (const DecompositionEntry* e = find_decomposition(cp)) {
        for (unsigned i = 0; i < e->length; ++i) {
            out.push_back({kDecompositionData[e->offset + i], src});
        }
        return;
    }
    out.push_back({cp, src});
}

}  // namespace

const char* unicode_version() { return tables::kUnicodeVersion; }

std::u32string decode_utf8(std::string_view bytes, bool* valid) {
    std::u32string out;
    out.reserve(bytes.size());
    bool ok = true;
    std::size_t i = 0;
    const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    while (i < n) {
        unsigned char b0 = s[i];
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int len;
        char32_t cp;
        char32_t min;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2; cp = b0 & 0x1F; min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3; cp = b0 & 0x0F; min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4; cp = b0 & 0x07; min = 0x10000;
        } else {
            out.push_back(kReplacementChar);
            ok = false;
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        bool bad = false;
        for (; j < i + static_cast<std::size_t>(len); ++j) {
            if (j >= n || (s[j] & 0xC0) != 0x80) {
                bad = true;
                break;
            }
            cp = (cp << 6) | (s[j] & 0x3F);
        }
        if (bad || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacementChar);
            ok = false;
            i = bad ? j : i + len;  // skip the maximal ill-formed prefix
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    if (valid) *valid = ok;
    return out;
}

bool validate_utf8(std::string_view bytes) {
    bool ok = true;
    decode_utf8(bytes, &ok);
    return ok;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) append_utf8(out, cp);
    return out;
}

bool is_letter(char32_t cp) {
    return in_ranges(kLetterRanges, kLetterRangesCount, cp);
}

bool is_digit(char32_t cp) {
    return in_ranges(kDigitRanges, kDigitRangesCount, cp);
}

uint8_t combining_class(char32_t cp) {
    const CombiningClassEntry* end = kCombiningClasses + kCombiningClassCount;
    const CombiningClassEntry* it = std::lower_bound(
        kCombiningClasses, end, cp,
        [](const CombiningClassEntry& e, char32_t v) { return e.cp < v; });
    return (it != end && it->cp == cp) ? it->ccc : 0;
}

char32_t simple_lower(char32_t cp) {
    // ASCII shortcut covers the bulk of real corpora.
    if (cp < 0x80) {
        return (cp >= U'A' && cp <= U'Z') ? cp + 0x20 : cp;
    }
    const CharMapping* end = kLowerMap + kLowerMapCount;
    const CharMapping* it = std::lower_bound(
        kLowerMap, end, cp,
        [](const CharMapping& m, char32_t v) { return m.from < v; });
    return (it != end && it->from == cp) ? it->to : cp;
}

void nfc(std::u32string_view in, std::u32string& out,
         std::vector<uint32_t>& out_to_in) {
    out.clear();
    out_to_in.clear();

    // Full canonical decomposition, each piece keeping its source index.
    std::vector<Piece> buf;
    buf.reserve(in.size() + in.size() / 4);
    for (uint32_t i = 0; i < in.size(); ++i) {
        decompose_into(in[i], i, buf);
    }

    // Canonical ordering: stable-sort runs of nonzero combining class.
    for (std::size_t i = 1; i < buf.size(); ++i) {
        uint8_t cc = combining_class(buf[i].cp);
        if (cc == 0) continue;
        std::size_t j = i;
        while (j > 0) {
            uint8_t prev = combining_class(buf[j - 1].cp);
            if (prev == 0 || prev <= cc) break;
            std::swap(buf[j - 1], buf[j]);
            --j;
        }
    }

    // Canonical composition (UAX #15): combine each character with the
    // last starter unless a character with >= combining class blocks it.
    std::vector<Piece> composed;
    composed.reserve(buf.size());
    std::ptrdiff_t starter = -1;
    uint8_t last_cc = 0;
    for (const Piece& p : buf) {
        uint8_t cc = combining_class(p.cp);
        if (starter >= 0 && (last_cc < cc || last_cc == 0)) {
            if (char32_t c = compose_pair(composed[starter].cp, p.cp)) {
                composed[starter].cp = c;
                continue;  // p merged into the starter; last_cc unchanged
            }
        }
        composed.push_back(p);
        if (cc == 0) starter = static_cast<std::ptrdiff_t>(composed.size()) - 1;
        last_cc = cc;
    }

    out.reserve(composed.size());
    out_to_in.reserve(composed.size());
    for (const Piece& p : composed) {
        out.push_back(p.cp);
        out_to_in.push_back(p.src);
    }
}

}  // namespace decontam::uni
