#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "decontam/normalize.hpp"
#include "decontam/unicode.hpp"
#include "support/test_helpers.hpp"

using namespace decontam;
using testsupport::load_jsonl;

TEST_CASE("normalize basic examples") {
    NormalizedText n = normalize("A teacher, has 56!");
    CHECK(uni::encode_utf8(n.text) == "ateacherhas56");
    CHECK(n.original_len == 18);
    REQUIRE(n.offset_map.size() == 13);
    CHECK(n.offset_map[0] == 0);   // 'A'
    CHECK(n.offset_map[1] == 2);   // 't' after the space
    CHECK(n.offset_map[11] == 15); // '5'
    CHECK(n.offset_map[12] == 16); // '6'

    NormalizedText empty = normalize("");
    CHECK(empty.text.empty());
    CHECK(empty.offset_map.empty());
    CHECK(empty.original_len == 0);
}

TEST_CASE("korean text survives normalization") {
    NormalizedText n = normalize("국가가 국민의 생활안정과...");
    CHECK(uni::encode_utf8(n.text) == "국가가국민의생활안정과");
    // Hangul syllables only; punctuation and spaces dropped.
    for (char32_t c : n.text) {
        CHECK(uni::is_letter(c));
    }
}

TEST_CASE("normalize matches the reference pipeline") {
    auto cases = load_jsonl(testsupport::data_dir() / "normalize_cases.jsonl");
    REQUIRE(cases.size() > 300);
    for (const auto& c : cases) {
        NormalizedText n = normalize(c["input"].get<std::string>());
        INFO("input = ", c["input"].get<std::string>());
        CHECK(uni::encode_utf8(n.text) == c["expected_text"].get<std::string>());
    }
}

TEST_CASE("normalize invariants on fixture corpus") {
    auto cases = load_jsonl(testsupport::data_dir() / "normalize_cases.jsonl");
    for (const auto& c : cases) {
        std::string input = c["input"].get<std::string>();
        NormalizedText n = normalize(input);

        // Character-class soundness and case-fold fixpoint.
        for (char32_t ch : n.text) {
            CHECK((uni::is_letter(ch) || uni::is_digit(ch)));
            CHECK(uni::simple_lower(ch) == ch);
        }
        // Idempotence.
        NormalizedText again = normalize(uni::encode_utf8(n.text));
        CHECK(again.text == n.text);
        // Monotone offsets within the original bounds.
        CHECK(n.text.size() <= n.original_len);
        for (std::size_t i = 0; i < n.offset_map.size(); ++i) {
            CHECK(n.offset_map[i] < n.original_len);
            if (i > 0) CHECK(n.offset_map[i] > n.offset_map[i - 1]);
        }
    }
}

TEST_CASE("offset map matches the per-character reference") {
    auto cases = load_jsonl(testsupport::data_dir() / "offset_cases.jsonl");
    REQUIRE(cases.size() > 200);
    for (const auto& c : cases) {
        NormalizedText n = normalize(c["input"].get<std::string>());
        INFO("input = ", c["input"].get<std::string>());
        CHECK(uni::encode_utf8(n.text) == c["expected_text"].get<std::string>());
        std::vector<uint32_t> expected_map;
        for (const auto& v : c["offset_map"]) {
            expected_map.push_back(v.get<uint32_t>());
        }
        CHECK(n.offset_map == expected_map);
    }
}

TEST_CASE("offset fidelity on composition-free text") {
    auto cases = load_jsonl(testsupport::data_dir() / "offset_cases.jsonl");
    for (const auto& c : cases) {
        std::u32string original =
            uni::decode_utf8(c["input"].get<std::string>());
        NormalizedText n = normalize(c["input"].get<std::string>());
        for (std::size_t i = 0; i < n.text.size(); ++i) {
            // Normalizing just the source character reproduces text[i].
            NormalizedText single =
                normalize(std::u32string_view(&original[n.offset_map[i]], 1));
            REQUIRE(!single.text.empty());
            CHECK(single.text[0] == n.text[i]);
        }
    }
}

TEST_CASE("map_span_to_original examples") {
    NormalizedText n = normalize("a-b c!");
    auto span = map_span_to_original(n, 0, 3);
    CHECK(span.first == 0);
    CHECK(span.second == 5);

    NormalizedText n2 = normalize("x.y");
    auto span2 = map_span_to_original(n2, 1, 2);
    CHECK(span2.first == 2);
    CHECK(span2.second == 3);
}

TEST_CASE("map_span_to_original rejects bad spans") {
    NormalizedText n = normalize("abc def");
    CHECK_THROWS_AS(map_span_to_original(n, 2, 2), std::out_of_range);
    CHECK_THROWS_AS(map_span_to_original(n, 0, 7), std::out_of_range);
    CHECK_THROWS_AS(map_span_to_original(n, 5, 3), std::out_of_range);
}

TEST_CASE("map_span round trip: normalized span is kept by the slice") {
    auto cases = load_jsonl(testsupport::data_dir() / "normalize_cases.jsonl");
    std::mt19937_64 rng(77);
    for (const auto& c : cases) {
        std::string input = c["input"].get<std::string>();
        std::u32string original = uni::decode_utf8(input);
        NormalizedText n = normalize(input);
        if (n.text.empty()) continue;
        for (int trial = 0; trial < 8; ++trial) {
            std::size_t start = rng() % n.text.size();
            std::size_t end = start + 1 + rng() % (n.text.size() - start);
            auto [ostart, oend] = map_span_to_original(n, start, end);
            REQUIRE(ostart < oend);
            REQUIRE(oend <= original.size());
            // Normalizing the original slice must contain the normalized
            // span as a subsequence of its kept characters.
            NormalizedText slice = normalize(std::u32string_view(original)
                                                 .substr(ostart, oend - ostart));
            std::u32string want = n.text.substr(start, end - start);
            std::size_t w = 0;
            for (char32_t ch : slice.text) {
                if (w < want.size() && ch == want[w]) ++w;
            }
            CHECK(w == want.size());
        }
    }
}
