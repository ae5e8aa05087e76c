#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "decontam/errors.hpp"
#include "decontam/pool.hpp"
#include "decontam/unicode.hpp"
#include "support/test_helpers.hpp"

using namespace decontam;
using testsupport::ExactReferencePool;
using testsupport::TempDir;

namespace {

std::vector<std::pair<uint32_t, std::u32string>> collect_windows(
    const std::u32string& text, uint32_t S) {
    std::vector<std::pair<uint32_t, std::u32string>> out;
    for_each_window(text, S, [&](uint32_t start, std::u32string_view w) {
        out.emplace_back(start, std::u32string(w));
    });
    return out;
}

}  // namespace

TEST_CASE("window extraction counts") {
    std::mt19937_64 rng(1);
    auto text50 = testsupport::random_normalized_window(rng, 50);
    auto text52 = testsupport::random_normalized_window(rng, 52);
    auto text49 = testsupport::random_normalized_window(rng, 49);

    CHECK(collect_windows(text50, 50).size() == 1);
    auto w52 = collect_windows(text52, 50);
    REQUIRE(w52.size() == 3);
    CHECK(w52[0].first == 0);
    CHECK(w52[1].first == 1);
    CHECK(w52[2].first == 2);
    CHECK(collect_windows(text49, 50).empty());
    CHECK(window_count(49, 50) == 0);
    CHECK(window_count(50, 50) == 1);
    CHECK(window_count(1000, 50) == 951);
}

TEST_CASE("fingerprint determinism and sensitivity") {
    std::mt19937_64 rng(2);
    auto w = testsupport::random_normalized_window(rng, 50);
    Fingerprint a = fingerprint_window(w, 1234);
    Fingerprint b = fingerprint_window(w, 1234);
    CHECK(a == b);
    CHECK(fingerprint_window(w, 1235) != a);

    auto w2 = w;
    w2[10] = (w2[10] == U'a') ? U'b' : U'a';
    CHECK(fingerprint_window(w2, 1234) != a);
}

TEST_CASE("fingerprint collision sweep over one million random windows") {
    std::mt19937_64 rng(3);
    std::vector<Fingerprint> fps;
    const std::size_t kCount = 1'000'000;
    fps.reserve(kCount);
    for (std::size_t i = 0; i < kCount; ++i) {
        fps.push_back(fingerprint_window(
            testsupport::random_normalized_window(rng, 50),
            kDefaultFingerprintSeed));
    }
    std::sort(fps.begin(), fps.end());
    auto dup = std::adjacent_find(fps.begin(), fps.end());
    CHECK(dup == fps.end());
}

TEST_CASE("build_pool dedups identical windows") {
    std::mt19937_64 rng(4);
    std::string example = uni::encode_utf8(
        testsupport::random_normalized_window(rng, 60));
    // Two byte-identical examples of normalized length 60 with S=50:
    // 11 unique windows, 22 seen.
    SubstringPool pool = build_pool(
        {{"bench", {example, example}}}, PoolConfig{});
    CHECK(pool.fingerprints().size() == 11);
    CHECK(pool.total_windows_seen() == 22);
    REQUIRE(pool.provenance().size() == 1);
    CHECK(pool.provenance()[0].example_count == 2);
    CHECK(pool.provenance()[0].window_count == 22);
}

TEST_CASE("short examples become short entries") {
    std::mt19937_64 rng(5);
    std::string example = uni::encode_utf8(
        testsupport::random_normalized_window(rng, 49));
    SubstringPool pool = build_pool({{"bench", {example}}}, PoolConfig{});
    CHECK(pool.fingerprints().empty());
    REQUIRE(pool.short_entries().size() == 1);
    CHECK(pool.short_entries()[0].text.size() == 49);

    // Empty examples contribute nothing.
    SubstringPool pool2 = build_pool({{"bench", {""}}}, PoolConfig{});
    CHECK(pool2.fingerprints().empty());
    CHECK(pool2.short_entries().empty());
}

TEST_CASE("build_pool validates configuration") {
    CHECK_THROWS_AS(build_pool({}, PoolConfig{}), ConfigError);
    PoolConfig tiny;
    tiny.window_size = 4;
    CHECK_THROWS_AS(build_pool({{"b", {"text"}}}, tiny), ConfigError);
}

TEST_CASE("pool membership agrees with the exact-string oracle") {
    std::mt19937_64 rng(6);
    std::vector<TestSet> sets(1);
    sets[0].name = "synthetic";
    for (int i = 0; i < 100; ++i) {
        sets[0].examples.push_back(
            testsupport::random_ascii_words(rng, 8 + rng() % 40));
    }
    PoolConfig config;
    SubstringPool pool = build_pool(sets, config);
    ExactReferencePool oracle(sets, config.window_size);

    CHECK(pool.fingerprints().size() == oracle.unique_windows());

    // Probe with a mix of real windows and perturbed ones.
    std::vector<std::u32string> probes;
    for (const std::u32string& w : oracle.windows()) {
        probes.push_back(w);
        if (probes.size() >= 5000) break;
    }
    while (probes.size() < 10000) {
        if (rng() % 2 == 0 && !oracle.windows().empty()) {
            auto it = oracle.windows().begin();
            std::advance(it, rng() % oracle.windows().size());
            std::u32string mutated = *it;
            mutated[rng() % mutated.size()] = U'a' + rng() % 26;
            probes.push_back(mutated);
        } else {
            probes.push_back(
                testsupport::random_normalized_window(rng, config.window_size));
        }
    }
    std::size_t disagreements = 0;
    for (const std::u32string& probe : probes) {
        if (pool.contains(std::u32string_view(probe)) !=
            oracle.contains(probe)) {
            ++disagreements;
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("pool_contains rejects wrong-length windows") {
    std::mt19937_64 rng(7);
    SubstringPool pool = build_pool(
        {{"b", {testsupport::random_ascii_words(rng, 30)}}}, PoolConfig{});
    CHECK_THROWS_AS(pool.contains(std::u32string_view(U"short")),
                    std::invalid_argument);
}

TEST_CASE("merge identity and commutativity") {
    std::mt19937_64 rng(8);
    std::vector<TestSet> sets_a{{"a", {}}};
    std::vector<TestSet> sets_b{{"b", {}}};
    for (int i = 0; i < 20; ++i) {
        sets_a[0].examples.push_back(testsupport::random_ascii_words(rng, 20));
        sets_b[0].examples.push_back(testsupport::random_ascii_words(rng, 20));
    }
    PoolConfig config;
    SubstringPool a = build_pool(sets_a, config);
    SubstringPool b = build_pool(sets_b, config);
    SubstringPool empty = build_pool({{"none", {}}}, config);

    SubstringPool with_empty = merge_pools(a, empty);
    CHECK(with_empty.fingerprints() == a.fingerprints());

    SubstringPool ab = merge_pools(a, b);
    SubstringPool ba = merge_pools(b, a);
    CHECK(ab.fingerprints() == ba.fingerprints());
    CHECK(ab.total_windows_seen() == ba.total_windows_seen());
}

TEST_CASE("merge of four shards equals the unsplit build") {
    std::mt19937_64 rng(9);
    std::vector<std::string> examples;
    for (int i = 0; i < 80; ++i) {
        examples.push_back(testsupport::random_ascii_words(rng, 10 + rng() % 30));
    }
    PoolConfig config;
    SubstringPool whole = build_pool({{"bench", examples}}, config);

    std::vector<SubstringPool> shards;
    for (int s = 0; s < 4; ++s) {
        std::vector<std::string> part;
        for (std::size_t i = s; i < examples.size(); i += 4) {
            part.push_back(examples[i]);
        }
        shards.push_back(build_pool({{"bench", part}}, config));
    }
    SubstringPool merged = merge_pools(merge_pools(shards[0], shards[1]),
                                       merge_pools(shards[2], shards[3]));
    CHECK(merged.fingerprints() == whole.fingerprints());
    CHECK(merged.total_windows_seen() == whole.total_windows_seen());
}

TEST_CASE("merge rejects mismatched configs") {
    PoolConfig a, b;
    b.window_size = 60;
    SubstringPool pa = build_pool({{"x", {"text"}}}, a);
    SubstringPool pb = build_pool({{"y", {"text"}}}, b);
    CHECK_THROWS_AS(merge_pools(pa, pb), ConfigError);
}

TEST_CASE("save and load round trip") {
    std::mt19937_64 rng(10);
    std::vector<TestSet> sets{{"alpha", {}}, {"beta", {}}};
    for (int i = 0; i < 30; ++i) {
        sets[0].examples.push_back(testsupport::random_ascii_words(rng, 25));
        sets[1].examples.push_back(testsupport::random_ascii_words(rng, 5));
    }
    SubstringPool pool = build_pool(sets, PoolConfig{});
    REQUIRE(!pool.short_entries().empty());

    TempDir dir("pool");
    auto path = dir.file("pool.dpl");
    save_pool(pool, path);
    SubstringPool loaded = load_pool(path);

    CHECK(loaded.fingerprints() == pool.fingerprints());
    CHECK(loaded.total_windows_seen() == pool.total_windows_seen());
    CHECK(loaded.config().window_size == pool.config().window_size);
    CHECK(loaded.config().fingerprint_seed == pool.config().fingerprint_seed);
    REQUIRE(loaded.short_entries().size() == pool.short_entries().size());
    for (std::size_t i = 0; i < loaded.short_entries().size(); ++i) {
        CHECK(loaded.short_entries()[i].text == pool.short_entries()[i].text);
        CHECK(loaded.short_entries()[i].owner == pool.short_entries()[i].owner);
    }
    REQUIRE(loaded.provenance().size() == 2);
    CHECK(loaded.provenance()[0].name == "alpha");
    CHECK(loaded.provenance()[1].name == "beta");

    // Byte-identical re-serialization.
    auto path2 = dir.file("pool2.dpl");
    save_pool(loaded, path2);
    CHECK(testsupport::read_file(path) == testsupport::read_file(path2));
}

TEST_CASE("pool file size follows the format") {
    std::mt19937_64 rng(11);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 10; ++i) {
        sets[0].examples.push_back(testsupport::random_ascii_words(rng, 25));
        sets[0].examples.push_back(testsupport::random_ascii_words(rng, 4));
    }
    SubstringPool pool = build_pool(sets, PoolConfig{});
    TempDir dir("poolsize");
    auto path = dir.file("pool.dpl");
    save_pool(pool, path);
    std::string bytes = testsupport::read_file(path);

    // header: magic(4) + version(2) + window(2) + seed(8) + count(8)
    std::size_t expected = 24;
    expected += 16 * pool.fingerprints().size();
    expected += 4;  // short-entry count
    for (const auto& entry : pool.short_entries()) {
        expected += 2 + uni::encode_utf8(entry.text).size();
    }
    // provenance blob: u32 length prefix + payload (read back the prefix).
    REQUIRE(bytes.size() >= expected + 4);
    std::size_t blob_at = expected;
    uint32_t blob_len = 0;
    for (int i = 0; i < 4; ++i) {
        blob_len |= static_cast<uint32_t>(
                        static_cast<unsigned char>(bytes[blob_at + i]))
                    << (8 * i);
    }
    CHECK(bytes.size() == expected + 4 + blob_len);
}

TEST_CASE("load reports corruption with offsets") {
    std::mt19937_64 rng(12);
    SubstringPool pool = build_pool(
        {{"bench", {testsupport::random_ascii_words(rng, 30)}}}, PoolConfig{});
    TempDir dir("corrupt");
    auto path = dir.file("pool.dpl");
    save_pool(pool, path);
    std::string bytes = testsupport::read_file(path);

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        testsupport::write_file(path, bytes);
        CHECK_THROWS_AS(load_pool(path), PoolFormatError);
    }
    SUBCASE("bad version") {
        bytes[4] = 0x7F;
        testsupport::write_file(path, bytes);
        CHECK_THROWS_AS(load_pool(path), PoolFormatError);
    }
    SUBCASE("truncated fingerprints") {
        testsupport::write_file(path, bytes.substr(0, 24 + 8));
        try {
            load_pool(path);
            FAIL("expected PoolFormatError");
        } catch (const PoolFormatError& e) {
            CHECK(e.offset() >= 24);
            CHECK(std::string(e.what()).find("offset") != std::string::npos);
        }
    }
    SUBCASE("unsorted fingerprints") {
        REQUIRE(pool.fingerprints().size() >= 2);
        // Swap the first two 16-byte records.
        for (int i = 0; i < 16; ++i) std::swap(bytes[24 + i], bytes[40 + i]);
        testsupport::write_file(path, bytes);
        CHECK_THROWS_AS(load_pool(path), PoolFormatError);
    }
    SUBCASE("trailing garbage") {
        bytes += "zzz";
        testsupport::write_file(path, bytes);
        CHECK_THROWS_AS(load_pool(path), PoolFormatError);
    }
}

TEST_CASE("exact audit mode answers like the fingerprint path") {
    std::mt19937_64 rng(13);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 40; ++i) {
        sets[0].examples.push_back(testsupport::random_ascii_words(rng, 30));
    }
    PoolConfig config;
    config.keep_exact_windows = true;
    SubstringPool pool = build_pool(sets, config);
    REQUIRE(pool.has_exact_windows());
    CHECK(pool.exact_windows().size() == pool.fingerprints().size());
    for (int i = 0; i < 2000; ++i) {
        std::u32string probe =
            (i % 2 == 0 && !pool.exact_windows().empty())
                ? pool.exact_windows()[rng() % pool.exact_windows().size()]
                : testsupport::random_normalized_window(rng,
                                                        config.window_size);
        CHECK(pool.contains(std::u32string_view(probe)) ==
              pool.exact_contains(probe));
    }
}
