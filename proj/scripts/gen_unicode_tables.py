#!/usr/bin/env python3
"""Generate core/src/unicode_tables.cpp from Python's unicodedata module.

The tables cover exactly what the normalizer needs: letter/digit ranges,
simple lowercase mappings, canonical combining classes, fully expanded
canonical decompositions, and primary composition pairs. Hangul syllables
are handled algorithmically at runtime and are excluded here.

Run from the repository root:  python3 scripts/gen_unicode_tables.py
"""

import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172

LETTER_CATS = {"Lu", "Ll", "Lt", "Lm", "Lo"}


def is_hangul_syllable(cp: int) -> bool:
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def char_ranges(pred):
    """Collapse the codepoint set {cp : pred(cp)} into inclusive ranges."""
    ranges = []
    start = None
    for cp in range(MAX_CP):
        if pred(cp):
            if start is None:
                start = cp
        else:
            if start is not None:
                ranges.append((start, cp - 1))
                start = None
    if start is not None:
        ranges.append((start, MAX_CP - 1))
    return ranges


def simple_lower_map():
    """1:1 lowercase mapping. For the rare multi-character full lowerings
    (U+0130 is the only one in practice) the first scalar matches the
    simple mapping, so take it."""
    mapping = []
    multi = []
    for cp in range(MAX_CP):
        ch = chr(cp)
        low = ch.lower()
        if low != ch:
            if len(low) > 1:
                multi.append(cp)
            mapping.append((cp, ord(low[0])))
    return mapping, multi


def canonical_decomposition(cp: int):
    """Raw canonical decomposition (one level), None if there is none."""
    if is_hangul_syllable(cp):
        return None  # algorithmic at runtime
    d = unicodedata.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    return [int(x, 16) for x in d.split()]


def full_decomposition(cp: int, cache: dict):
    if cp in cache:
        return cache[cp]
    d = canonical_decomposition(cp)
    if d is None:
        cache[cp] = None
        return None
    out = []
    for piece in d:
        sub = full_decomposition(piece, cache)
        out.extend(sub if sub is not None else [piece])
    cache[cp] = out
    return out


def composition_pairs():
    """Primary composites: canonical decomposition of exactly two scalars
    that NFC actually recomposes (this screens out every exclusion class)."""
    pairs = []
    for cp in range(MAX_CP):
        if is_hangul_syllable(cp):
            continue
        d = canonical_decomposition(cp)
        if d is None or len(d) != 2:
            continue
        a, b = d
        if unicodedata.combining(chr(a)) != 0:
            continue  # non-starter decomposition, never composes
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            pairs.append((a, b, cp))
    return pairs


def emit(out):
    w = out.write
    version = unicodedata.unidata_version

    letter_ranges = char_ranges(lambda cp: unicodedata.category(chr(cp)) in LETTER_CATS)
    digit_ranges = char_ranges(lambda cp: unicodedata.category(chr(cp)) == "Nd")
    lower_map, multi = simple_lower_map()
    ccc = [(cp, unicodedata.combining(chr(cp)))
           for cp in range(MAX_CP) if unicodedata.combining(chr(cp)) != 0]

    cache = {}
    decomp_entries = []  # (cp, offset, len)
    decomp_data = []
    for cp in range(MAX_CP):
        d = full_decomposition(cp, cache)
        if d is None:
            continue
        decomp_entries.append((cp, len(decomp_data), len(d)))
        decomp_data.extend(d)

    pairs = composition_pairs()
    pairs.sort(key=lambda t: (t[0] << 32) | t[1])

    w("// Generated by scripts/gen_unicode_tables.py — do not edit by hand.\n")
    w("// Source: Python unicodedata, Unicode %s.\n\n" % version)
    w('#include "unicode_tables.hpp"\n\n')
    w("namespace decontam::uni::tables {\n\n")
    w('const char* const kUnicodeVersion = "%s";\n\n' % version)

    def dump_ranges(name, ranges):
        w("const CharRange %s[] = {\n" % name)
        for i in range(0, len(ranges), 4):
            row = ranges[i:i + 4]
            w("    " + " ".join("{0x%X, 0x%X}," % r for r in row) + "\n")
        w("};\n")
        w("const std::size_t %sCount = %d;\n\n" % (name, len(ranges)))

    dump_ranges("kLetterRanges", letter_ranges)
    dump_ranges("kDigitRanges", digit_ranges)

    w("const CharMapping kLowerMap[] = {\n")
    for i in range(0, len(lower_map), 4):
        row = lower_map[i:i + 4]
        w("    " + " ".join("{0x%X, 0x%X}," % m for m in row) + "\n")
    w("};\n")
    w("const std::size_t kLowerMapCount = %d;\n\n" % len(lower_map))

    w("const CombiningClassEntry kCombiningClasses[] = {\n")
    for i in range(0, len(ccc), 6):
        row = ccc[i:i + 6]
        w("    " + " ".join("{0x%X, %d}," % c for c in row) + "\n")
    w("};\n")
    w("const std::size_t kCombiningClassCount = %d;\n\n" % len(ccc))

    w("const DecompositionEntry kDecompositions[] = {\n")
    for i in range(0, len(decomp_entries), 4):
        row = decomp_entries[i:i + 4]
        w("    " + " ".join("{0x%X, %d, %d}," % e for e in row) + "\n")
    w("};\n")
    w("const std::size_t kDecompositionCount = %d;\n\n" % len(decomp_entries))

    w("const char32_t kDecompositionData[] = {\n")
    for i in range(0, len(decomp_data), 8):
        row = decomp_data[i:i + 8]
        w("    " + " ".join("0x%X," % c for c in row) + "\n")
    w("};\n")
    w("const std::size_t kDecompositionDataCount = %d;\n\n" % len(decomp_data))

    w("const CompositionPair kCompositionPairs[] = {\n")
    for i in range(0, len(pairs), 3):
        row = pairs[i:i + 3]
        w("    " + " ".join("{0x%X, 0x%X, 0x%X}," % p for p in row) + "\n")
    w("};\n")
    w("const std::size_t kCompositionPairCount = %d;\n\n" % len(pairs))

    w("}  // namespace decontam::uni::tables\n")

    sys.stderr.write(
        "letters=%d digits=%d lower=%d (multi-char lowerings: %s) ccc=%d "
        "decomp=%d data=%d pairs=%d\n"
        % (len(letter_ranges), len(digit_ranges), len(lower_map),
           ",".join("U+%04X" % c for c in multi) or "none",
           len(ccc), len(decomp_entries), len(decomp_data), len(pairs)))


def main():
    path = "core/src/unicode_tables.cpp"
    if len(sys.argv) > 1:
        path = sys.argv[1]
    with open(path, "w", encoding="utf-8") as f:
        emit(f)
    print("wrote", path)


if __name__ == "__main__":
    main()
