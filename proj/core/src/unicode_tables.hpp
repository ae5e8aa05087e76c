// Declarations for the generated Unicode data tables (unicode_tables.cpp).
// Internal to the library; not installed.
#pragma once

#include <cstddef>

namespace decontam::uni::tables {

struct CharRange {
    char32_t first;
    char32_t last;  // inclusive
};

struct CharMapping {
    char32_t from;
    char32_t to;
};

struct CombiningClassEntry {
    char32_t cp;
    unsigned char ccc;
};

struct DecompositionEntry {
    char32_t cp;
    unsigned int offset;  // into kDecompositionData
    unsigned char length;
};

struct CompositionPair {
    char32_t starter;
    char32_t second;
    char32_t composed;
};

extern const char* const kUnicodeVersion;

extern const CharRange kLetterRanges[];
extern const std::size_t kLetterRangesCount;
extern const CharRange kDigitRanges[];
extern const std::size_t kDigitRangesCount;

extern const CharMapping kLowerMap[];
extern const std::size_t kLowerMapCount;

extern const CombiningClassEntry kCombiningClasses[];
extern const std::size_t kCombiningClassCount;

extern const DecompositionEntry kDecompositions[];
extern const std::size_t kDecompositionCount;
extern const char32_t kDecompositionData[];
extern const std::size_t kDecompositionDataCount;

extern const CompositionPair kCompositionPairs[];
extern const std::size_t kCompositionPairCount;

}  // namespace decontam::uni::tables
