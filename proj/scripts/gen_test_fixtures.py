#!/usr/bin/env python3
"""Generate frozen test fixtures under tests/data/ from Python's unicodedata.

The Python implementations here are the reference oracles for the C++
normalization pipeline: they share the rules (NFC, fold, keep letters and
digits, iterate to a fixed point) but none of the code.

Run from the repository root:  python3 scripts/gen_test_fixtures.py
"""

import json
import os
import random
import unicodedata

OUT_DIR = "tests/data"

KEEP_CATS = {"Lu", "Ll", "Lt", "Lm", "Lo", "Nd"}


def fold_char(ch):
    low = ch.lower()
    return low[0] if len(low) > 1 else low


def keep(ch):
    return unicodedata.category(ch) in KEEP_CATS


def one_pass(s):
    composed = unicodedata.normalize("NFC", s)
    out = []
    for ch in composed:
        f = fold_char(ch)
        if keep(f):
            out.append(f)
    return "".join(out)


def ref_normalize(s):
    cur = s
    for _ in range(8):
        nxt = one_pass(cur)
        if nxt == cur:
            return cur
        cur = nxt
    return cur


def assigned(cp):
    return unicodedata.category(chr(cp)) != "Cn"


def pair_seconds():
    """Starter characters that can compose onto a preceding character."""
    seconds = set()
    for cp in range(0x110000):
        if 0xAC00 <= cp < 0xAC00 + 11172:
            continue
        d = unicodedata.decomposition(chr(cp))
        if not d or d.startswith("<"):
            continue
        parts = [int(x, 16) for x in d.split()]
        if len(parts) != 2:
            continue
        a, b = parts
        if unicodedata.combining(chr(a)) != 0:
            continue
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            if unicodedata.combining(chr(b)) == 0:
                seconds.add(b)
    return seconds


def is_jamo(cp):
    return (0x1100 <= cp <= 0x11FF or 0xA960 <= cp <= 0xA97F
            or 0xD7B0 <= cp <= 0xD7FF)


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    rng = random.Random(20240809)

    # --- NFC cases: targeted constructions plus fuzz over arbitrary text ---
    nfc_inputs = [
        "",
        "abc",
        "café",                       # e + combining acute
        "é́",                     # composed e-acute + another acute
        "Å",                     # A + ring -> Å
        "Å",                           # Angstrom sign (singleton)
        "K",                           # Kelvin sign (singleton)
        "ḍ̇",                     # ordering: dot-above then dot-below
        "ḍ̇",                    # d + dot-below + dot-above
        "가",                     # jamo L + V -> syllable
        "각",               # jamo L + V + T
        "각",                     # syllable LV + trailing T
        "ᄀ가",               # L L V: only the second pair joins
        "̸̸",                     # lone combining marks
        "q̣̇s",                   # marks on an ordinary letter
        "གྷ",                           # Tibetan gha (excluded composite)
        "אָ",                     # Hebrew alef + qamats
        "한국어 텍스트",
        "한국",  # decomposed 한국
        "ﬁnish",                       # fi ligature (compat, untouched)
    ]
    interesting = [
        list(range(0x20, 0x7F)),
        [0xE9, 0xE8, 0xC5, 0x131, 0x130, 0x212B, 0x212A, 0x1E9E, 0xDF],
        [0x300, 0x301, 0x307, 0x323, 0x338, 0x30A],   # combining marks
        list(range(0x1100, 0x1113)) + list(range(0x1161, 0x1176))
        + list(range(0x11A8, 0x11C3)),                # jamo
        [rng.randrange(0xAC00, 0xD7A4) for _ in range(40)],  # syllables
        [0x3042, 0x30A2, 0x4E2D, 0x6587],             # kana/han
        [0x391, 0x3B1, 0x410, 0x430],                 # Greek/Cyrillic
        [0x660, 0x966, 0xFF10],                       # other decimal digits
    ]
    for _ in range(400):
        pool_idx = [rng.randrange(len(interesting)) for _ in range(rng.randrange(1, 4))]
        chars = []
        for _ in range(rng.randrange(1, 50)):
            group = interesting[rng.choice(pool_idx)]
            cp = rng.choice(group)
            if assigned(cp):
                chars.append(chr(cp))
        nfc_inputs.append("".join(chars))

    with open(os.path.join(OUT_DIR, "nfc_cases.jsonl"), "w") as f:
        for s in nfc_inputs:
            f.write(json.dumps({
                "input": s,
                "expected": unicodedata.normalize("NFC", s),
            }, ensure_ascii=True) + "\n")

    # --- Full normalization pipeline cases (text only, any input) ---
    norm_inputs = [
        "",
        "A teacher, has 56!",
        "Hello, World! 123",
        "  \t\n ",
        "국가가 국민의 생활안정과 복지증진을 위하여",
        "ÉTÉ — déjà vu; näive CAFÉ",
        "가 한",   # jamo with a dropped space
        "İstanbul ISPARTA ß ẞ",
        "№42 ① Ⅷ ¾",                        # No/Nl/fraction digits drop
        "ｆｕｌｌｗｉｄｔｈ１２３",
    ] + nfc_inputs[1:]
    with open(os.path.join(OUT_DIR, "normalize_cases.jsonl"), "w") as f:
        for s in norm_inputs:
            f.write(json.dumps({
                "input": s,
                "expected_text": ref_normalize(s),
            }, ensure_ascii=True) + "\n")

    # --- Offset-map cases restricted to composition-free characters, where
    # --- the per-character reference applies exactly.
    seconds = pair_seconds()
    safe_groups = []
    for group in interesting:
        safe = [cp for cp in group
                if assigned(cp) and unicodedata.combining(chr(cp)) == 0
                and not is_jamo(cp) and cp not in seconds]
        if safe:
            safe_groups.append(safe)

    def per_char_reference(s):
        text = []
        offsets = []
        for i, ch in enumerate(s):
            piece = ref_normalize(ch)
            for out_ch in piece:
                text.append(out_ch)
                offsets.append(i)
        return "".join(text), offsets

    offset_inputs = ["", "a-b c!", "x.y", "A teacher, has 56!"]
    for _ in range(300):
        chars = []
        for _ in range(rng.randrange(0, 60)):
            group = safe_groups[rng.randrange(len(safe_groups))]
            chars.append(chr(rng.choice(group)))
        offset_inputs.append("".join(chars))

    with open(os.path.join(OUT_DIR, "offset_cases.jsonl"), "w") as f:
        for s in offset_inputs:
            text, offsets = per_char_reference(s)
            f.write(json.dumps({
                "input": s,
                "expected_text": text,
                "offset_map": offsets,
            }, ensure_ascii=True) + "\n")

    # --- Character property spot checks ---
    with open(os.path.join(OUT_DIR, "char_props.jsonl"), "w") as f:
        cps = ([rng.randrange(0x110000) for _ in range(1500)]
               + [0x41, 0x61, 0x30, 0xAC00, 0x1100, 0x661, 0x2460, 0x3002])
        for cp in cps:
            if 0xD800 <= cp <= 0xDFFF:
                continue
            ch = chr(cp)
            cat = unicodedata.category(ch)
            f.write(json.dumps({
                "cp": cp,
                "letter": cat in ("Lu", "Ll", "Lt", "Lm", "Lo"),
                "digit": cat == "Nd",
                "lower": ord(fold_char(ch)),
            }) + "\n")

    print("fixtures written to", OUT_DIR)


if __name__ == "__main__":
    main()
