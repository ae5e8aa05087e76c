#include "decontam/normalize.hpp"

#include <stdexcept>

#include "decontam/unicode.hpp"

namespace decontam {

namespace {

// Case-fold then keep letters and digits. in_map[i] indexes whatever space
// `in` lives in; kept characters carry those indices through.
void fold_filter(const std::u32string& in, const std::vector<uint32_t>& in_map,
                 std::u32string& out, std::vector<uint32_t>& out_map) {
    out.clear();
    out_map.clear();
    out.reserve(in.size());
    out_map.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        char32_t folded = uni::simple_lower(in[i]);
        if (uni::is_letter(folded) || uni::is_digit(folded)) {
            out.push_back(folded);
            out_map.push_back(in_map[i]);
        }
    }
}

bool all_ascii(std::u32string_view text) {
    for (char32_t cp : text) {
        if (cp >= 0x80) return false;
    }
    return true;
}

}  // namespace

NormalizedText normalize(std::u32string_view raw) {
    NormalizedText result;
    result.original_len = static_cast<uint32_t>(raw.size());

    if (all_ascii(raw)) {
        // ASCII is NFC-inert; one pass suffices.
        result.text.reserve(raw.size());
        result.offset_map.reserve(raw.size());
        for (uint32_t i = 0; i < raw.size(); ++i) {
            char32_t c = raw[i];
            if ((c >= U'a' && c <= U'z') || (c >= U'0' && c <= U'9')) {
                result.text.push_back(c);
                result.offset_map.push_back(i);
            } else if (c >= U'A' && c <= U'Z') {
                result.text.push_back(c + 0x20);
                result.offset_map.push_back(i);
            }
        }
        return result;
    }

    // Compose-fold-filter until stable. Filtering can make previously
    // separated characters adjacent (e.g. conjoining jamo around dropped
    // punctuation), which a second composition pass then merges; each pass
    // never grows the text, so this terminates quickly.
    std::u32string cur(raw);
    std::vector<uint32_t> cur_map(cur.size());
    for (uint32_t i = 0; i < cur_map.size(); ++i) cur_map[i] = i;

    std::u32string composed, filtered;
    std::vector<uint32_t> composed_map, filtered_map;
    const int kMaxPasses = 8;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
        uni::nfc(cur, composed, composed_map);
        fold_filter(composed, composed_map, filtered, filtered_map);
        // Rebase filtered_map (indices into cur) onto the original text.
        for (uint32_t& idx : filtered_map) idx = cur_map[idx];
        bool stable = (filtered == cur);
        cur.swap(filtered);
        cur_map.swap(filtered_map);
        if (stable) break;
    }

    result.text = std::move(cur);
    result.offset_map = std::move(cur_map);
    return result;
}

NormalizedText normalize(std::string_view raw_utf8) {
    return normalize(uni::decode_utf8(raw_utf8));
}

std::pair<uint32_t, uint32_t> map_span_to_original(const NormalizedText& norm,
                                                   std::size_t start,
                                                   std::size_t end) {
    if (start >= end || end > norm.text.size()) {
        throw std::out_of_range("map_span_to_original: span [" +
                                std::to_string(start) + ", " +
                                std::to_string(end) + ") out of range for " +
                                std::to_string(norm.text.size()) +
                                " normalized characters");
    }
    return {norm.offset_map[start], norm.offset_map[end - 1] + 1};
}

}  // namespace decontam
