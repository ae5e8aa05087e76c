// Canonical matching alphabet: NFC-composed, case-folded letters and digits
// only, with a map from each normalized character back to the original
// character that produced it.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace decontam {

struct NormalizedText {
    // Normalized scalar values: Unicode letters and digits only, lowercase.
    std::u32string text;
    // offset_map[i] = index, in scalar values of the original text, of the
    // character that produced text[i]. Strictly increasing.
    std::vector<uint32_t> offset_map;
    // Length of the original text in scalar values.
    uint32_t original_len = 0;
};

NormalizedText normalize(std::string_view raw_utf8);
NormalizedText normalize(std::u32string_view raw);

// Maps a normalized span [start, end) back to original-text scalar indices:
// [offset_map[start], offset_map[end-1] + 1). Throws std::out_of_range on
// an empty or out-of-bounds span.
std::pair<uint32_t, uint32_t> map_span_to_original(const NormalizedText& norm,
                                                   std::size_t start,
                                                   std::size_t end);

}  // namespace decontam
