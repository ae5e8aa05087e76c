#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "decontam/unicode.hpp"
#include "support/test_helpers.hpp"

using namespace decontam;
using testsupport::load_jsonl;

TEST_CASE("utf8 round trip") {
    std::string samples[] = {
        "",
        "plain ascii",
        "caf\xc3\xa9",
        "\xe1\x84\x80\xe1\x85\xa1",            // jamo
        "\xea\xb0\x80\xeb\x82\x98\xeb\x8b\xa4",  // syllables
        "\xf0\x9f\x98\x80 emoji",
    };
    for (const std::string& s : samples) {
        bool valid = false;
        std::u32string decoded = uni::decode_utf8(s, &valid);
        CHECK(valid);
        CHECK(uni::encode_utf8(decoded) == s);
    }
}

TEST_CASE("utf8 invalid sequences replaced, flagged") {
    struct Case {
        std::string bytes;
        bool valid;
    } cases[] = {
        {"\x80", false},              // stray continuation
        {"\xc3", false},              // truncated 2-byte
        {"\xe0\x80\x80", false},      // overlong
        {"\xed\xa0\x80", false},      // surrogate
        {"\xf4\x90\x80\x80", false},  // above U+10FFFF
        {"ok\xc3\xa9", true},
    };
    for (const auto& c : cases) {
        bool valid = true;
        std::u32string decoded = uni::decode_utf8(c.bytes, &valid);
        CHECK(valid == c.valid);
        if (!c.valid) {
            bool has_replacement = false;
            for (char32_t cp : decoded) {
                if (cp == uni::kReplacementChar) has_replacement = true;
            }
            CHECK(has_replacement);
        }
        CHECK(uni::validate_utf8(c.bytes) == c.valid);
    }
}

TEST_CASE("character properties match the reference database") {
    auto cases = load_jsonl(testsupport::data_dir() / "char_props.jsonl");
    REQUIRE(cases.size() > 1000);
    for (const auto& c : cases) {
        char32_t cp = c["cp"].get<uint32_t>();
        INFO("cp = ", static_cast<uint32_t>(cp));
        CHECK(uni::is_letter(cp) == c["letter"].get<bool>());
        CHECK(uni::is_digit(cp) == c["digit"].get<bool>());
        CHECK(uni::simple_lower(cp) == c["lower"].get<uint32_t>());
    }
}

TEST_CASE("nfc agrees with the reference implementation") {
    auto cases = load_jsonl(testsupport::data_dir() / "nfc_cases.jsonl");
    REQUIRE(cases.size() > 300);
    std::u32string out;
    std::vector<uint32_t> map;
    for (const auto& c : cases) {
        std::u32string input = uni::decode_utf8(c["input"].get<std::string>());
        std::u32string expected =
            uni::decode_utf8(c["expected"].get<std::string>());
        uni::nfc(input, out, map);
        INFO("input = ", c["input"].get<std::string>());
        CHECK(out == expected);
        CHECK(map.size() == out.size());
    }
}

TEST_CASE("nfc is idempotent on fixture outputs") {
    auto cases = load_jsonl(testsupport::data_dir() / "nfc_cases.jsonl");
    std::u32string once, twice;
    std::vector<uint32_t> map;
    for (const auto& c : cases) {
        std::u32string expected =
            uni::decode_utf8(c["expected"].get<std::string>());
        uni::nfc(expected, once, map);
        CHECK(once == expected);
        uni::nfc(once, twice, map);
        CHECK(twice == once);
    }
}

TEST_CASE("nfc offset map points into the input") {
    auto cases = load_jsonl(testsupport::data_dir() / "nfc_cases.jsonl");
    std::u32string out;
    std::vector<uint32_t> map;
    for (const auto& c : cases) {
        std::u32string input = uni::decode_utf8(c["input"].get<std::string>());
        uni::nfc(input, out, map);
        for (std::size_t i = 0; i < map.size(); ++i) {
            CHECK(map[i] < input.size());
            if (i > 0) CHECK(map[i] >= map[i - 1]);  // non-decreasing
        }
    }
}

TEST_CASE("hangul compose and decompose round") {
    std::u32string out;
    std::vector<uint32_t> map;
    // Every syllable recomposes to itself; offsets collapse to the source.
    for (char32_t s = 0xAC00; s < 0xAC00 + 11172; s += 97) {
        std::u32string in(1, s);
        uni::nfc(in, out, map);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == s);
        CHECK(map[0] == 0);
    }
}
