#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "decontam/errors.hpp"
#include "decontam/scan.hpp"
#include "decontam/unicode.hpp"
#include "support/test_helpers.hpp"

using namespace decontam;
using testsupport::ExactReferencePool;

namespace {

const char* kStickerQuestion =
    "A teacher has three packages of stickers. One package contains 56 "
    "stickers, another package contains 48 stickers, and the third package "
    "contains 58 stickers. If the teacher divides all the stickers equally "
    "among 27 students, how many stickers will each student receive?\n"
    "A. 6 stickers\nB. 9 stickers\nC. 54 stickers\nD. 81 stickers\nAnswer:";

const char* kStickerWebPassage =
    "math drill of the day. A teacher has three packages of stickers. One "
    "package contains 56 stickers, another package contains 48 stickers, and "
    "the third package contains 58 stickers. If the teacher divides all the "
    "stickers equally among 27 students, how many stickers will each student "
    "receive? 6 stickers is correct. #4 Last week Mario walked 7 3/4 miles. "
    "This week he walked 15 5/6 miles. What is the difference between the "
    "distance he walked this week and the distance he walked last week?";

const char* kKoreanQuestion =
    "국가가 국민의 생활안정과 복지증진을 위하여 보험의 원리를 도입하여 만든 "
    "사회보험의 일종으로 가입자, 사용자 및 국가로부터 일정한 보험료를 받고 "
    "이를 재원으로 여러 가지 정형화된 보험금을 지급하는 사회보장제도는?\n"
    "A. 국민건강보험\nB. 국민연금\nC. 고용보험\nD. 산업재해보상보험\n정답:";

const char* kKoreanWebPassage =
    "더군다나 개인주의의 확산, 핵가족화의 진전에 따라 전통적인 가족의 역할인 "
    "노인부양의 기능이 약화됨으로써 국가개입의 중요성은 더욱 증가하게 되었다. "
    "따라서 국민연금제도는 국가가 국민의 생활안정과 복지증진을 위하여 보험의 "
    "원리를 도입하여 만든 사회보험의 일종으로 가입자, 사용자 및 국가로부터 "
    "일정한 보험료를 받고 이를 재원으로 여러 가지 정형화된 보험금을 지급하는 "
    "사회보장제도이다.";

}  // namespace

TEST_CASE("sample_positions returns everything when few windows") {
    CHECK(sample_positions(5, 10, 42) ==
          std::vector<uint32_t>{0, 1, 2, 3, 4});
    CHECK(sample_positions(0, 10, 42).empty());
    CHECK(sample_positions(10, 10, 1) ==
          std::vector<uint32_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("sample_positions basic contract") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        auto positions = sample_positions(1000, 10, seed);
        REQUIRE(positions.size() == 10);
        CHECK(std::is_sorted(positions.begin(), positions.end()));
        CHECK(std::adjacent_find(positions.begin(), positions.end()) ==
              positions.end());
        for (uint32_t p : positions) CHECK(p < 1000);
        CHECK(sample_positions(1000, 10, seed) == positions);  // determinism
    }
}

TEST_CASE("sample_positions is uniform within 3 sigma") {
    const uint64_t kWindows = 1000;
    const uint32_t kSamples = 10;
    const int kTrials = 100000;
    std::vector<uint64_t> counts(kWindows, 0);
    for (int t = 0; t < kTrials; ++t) {
        for (uint32_t p : sample_positions(kWindows, kSamples, 0x1234 + t)) {
            ++counts[p];
        }
    }
    // Each position is included with probability N/W per trial.
    double p = static_cast<double>(kSamples) / static_cast<double>(kWindows);
    double mean = kTrials * p;
    double sigma = std::sqrt(kTrials * p * (1 - p));
    int outliers = 0;
    for (uint64_t c : counts) {
        if (std::abs(static_cast<double>(c) - mean) > 3 * sigma) ++outliers;
    }
    // ~0.27% of bins may pass 3 sigma by chance; allow a small margin.
    CHECK(outliers <= 10);
}

TEST_CASE("detection_probability closed form") {
    CHECK(detection_probability(1000, 0, 10) == 0.0);
    CHECK(detection_probability(5, 1, 10) == 1.0);
    CHECK(detection_probability(10, 10, 3) == 1.0);
    CHECK_THROWS_AS(detection_probability(10, 11, 3), std::invalid_argument);
    CHECK_THROWS_AS(detection_probability(10, 1, 0), std::invalid_argument);

    // Cross-check against the hypergeometric term computed directly.
    double direct = 1.0;
    for (int i = 0; i < 10; ++i) {
        direct *= static_cast<double>(800 - i) / static_cast<double>(1000 - i);
    }
    CHECK(detection_probability(1000, 200, 10) ==
          doctest::Approx(1.0 - direct).epsilon(1e-12));
}

TEST_CASE("detection_probability matches Monte-Carlo frequency") {
    const uint64_t kWindows = 1000;
    const uint64_t kContaminated = 200;
    const uint32_t kSamples = 10;
    const int kTrials = 4000;

    std::mt19937_64 rng(99);
    int detected = 0;
    for (int t = 0; t < kTrials; ++t) {
        // Plant a fresh random contaminated set each trial.
        std::set<uint32_t> bad;
        while (bad.size() < kContaminated) {
            bad.insert(static_cast<uint32_t>(rng() % kWindows));
        }
        for (uint32_t p : sample_positions(kWindows, kSamples, rng())) {
            if (bad.count(p)) {
                ++detected;
                break;
            }
        }
    }
    double empirical = static_cast<double>(detected) / kTrials;
    double analytic = detection_probability(kWindows, kContaminated, kSamples);
    CHECK(std::abs(empirical - analytic) < 0.03);
}

TEST_CASE("full copy of a long test example is always flagged") {
    std::mt19937_64 rng(17);
    std::string example = testsupport::random_ascii_words(rng, 40);
    REQUIRE(normalize(example).text.size() >= 59);  // >= S + 9
    SubstringPool pool = build_pool({{"bench", {example}}}, PoolConfig{});

    ScanConfig config;
    ContaminationVerdict verdict =
        check_document("doc", example, pool, config);
    CHECK(verdict.contaminated);
    CHECK(verdict.window_probe_hits == verdict.windows_tested);
    REQUIRE(!verdict.matches.empty());
    CHECK(verdict.matches[0].benchmark == "bench");
}

TEST_CASE("document sharing nothing with the pool is clean") {
    SubstringPool pool = build_pool(
        {{"bench", {"abcdefghij abcdefghij abcdefghij abcdefghij abcdefghij "
                    "abcdefghij"}}},
        PoolConfig{});
    ScanConfig config;
    // Different alphabet entirely (digits and distinct letters).
    std::string doc =
        "0123456789 zyxwvu 0123456789 zyxwvu 0123456789 zyxwvu 0123456789 "
        "zyxwvu 0123456789 zyxwvu 0123456789";
    ContaminationVerdict verdict = check_document("doc", doc, pool, config);
    CHECK(!verdict.contaminated);
    CHECK(verdict.matches.empty());
}

TEST_CASE("table-style sticker question flags the web passage") {
    SubstringPool pool =
        build_pool({{"mmlu", {kStickerQuestion}}}, PoolConfig{});
    ScanConfig config;
    ContaminationVerdict verdict =
        check_document("web-1", kStickerWebPassage, pool, config);
    REQUIRE(verdict.contaminated);
    REQUIRE(!verdict.matches.empty());
    // The evidence span must cover the shared sentence.
    bool covered = false;
    for (const MatchSpan& m : verdict.matches) {
        if (m.evidence_text.find("A teacher has three packages of stickers") !=
            std::string::npos) {
            covered = true;
            CHECK(m.benchmark == "mmlu");
        }
    }
    CHECK(covered);
}

TEST_CASE("korean web passage flags against the korean question") {
    SubstringPool pool =
        build_pool({{"kmmlu", {kKoreanQuestion}}}, PoolConfig{});
    ScanConfig config;
    ContaminationVerdict verdict =
        check_document("web-ko", kKoreanWebPassage, pool, config);
    REQUIRE(verdict.contaminated);
    bool covered = false;
    for (const MatchSpan& m : verdict.matches) {
        if (m.evidence_text.find("국가가 국민의 생활안정과") !=
            std::string::npos) {
            covered = true;
        }
    }
    CHECK(covered);
}

TEST_CASE("short documents are screened against short entries") {
    // One long example plus one short one.
    std::mt19937_64 rng(21);
    std::string long_example = testsupport::random_ascii_words(rng, 40);
    SubstringPool pool = build_pool(
        {{"bench", {long_example, "What is 2+2?"}}}, PoolConfig{});
    REQUIRE(pool.short_entries().size() == 1);

    ScanConfig config;
    // A short doc embedding the short entry.
    ContaminationVerdict verdict =
        check_document("short", "Quiz: What is 2+2? Reply!", pool, config);
    CHECK(verdict.skipped_too_short);
    CHECK(verdict.windows_available == 0);
    CHECK(verdict.contaminated);
    REQUIRE(!verdict.matches.empty());
    CHECK(verdict.matches[0].source == MatchSource::kShortEntry);

    // A long doc embedding the short entry still gets the containment scan.
    std::string long_doc = testsupport::random_ascii_words(rng, 60) +
                           " What is 2+2? " +
                           testsupport::random_ascii_words(rng, 60);
    ContaminationVerdict verdict2 =
        check_document("long", long_doc, pool, config);
    CHECK(!verdict2.skipped_too_short);
    CHECK(verdict2.contaminated);
    bool has_short = false;
    for (const MatchSpan& m : verdict2.matches) {
        if (m.source == MatchSource::kShortEntry) has_short = true;
    }
    CHECK(has_short);

    // Clean short doc.
    ContaminationVerdict verdict3 =
        check_document("clean", "nothing related here", pool, config);
    CHECK(!verdict3.contaminated);
}

TEST_CASE("verdicts are deterministic and depend on doc_id") {
    std::mt19937_64 rng(23);
    std::string example = testsupport::random_ascii_words(rng, 60);
    SubstringPool pool = build_pool({{"bench", {example}}}, PoolConfig{});
    std::string doc = testsupport::random_ascii_words(rng, 200) + " " +
                      example.substr(0, example.size() / 2);

    ScanConfig config;
    config.global_seed = 7;
    ContaminationVerdict a = check_document("id-1", doc, pool, config);
    ContaminationVerdict b = check_document("id-1", doc, pool, config);
    CHECK(a.sampled_positions == b.sampled_positions);
    CHECK(a.contaminated == b.contaminated);
    ContaminationVerdict c = check_document("id-2", doc, pool, config);
    CHECK(a.sampled_positions != c.sampled_positions);
}

TEST_CASE("sampled positives are never exhaustive negatives") {
    std::mt19937_64 rng(31);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 25; ++i) {
        sets[0].examples.push_back(testsupport::random_ascii_words(rng, 30));
    }
    PoolConfig pool_config;
    SubstringPool pool = build_pool(sets, pool_config);
    ExactReferencePool oracle(sets, pool_config.window_size);

    ScanConfig sampled;
    sampled.global_seed = 5;
    ScanConfig exhaustive = sampled;
    exhaustive.mode = ScanMode::kExhaustive;

    int planted_count = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string doc = testsupport::random_ascii_words(rng, 30 + rng() % 80);
        if (rng() % 3 == 0) {
            // Plant a fragment of a pool example at a random position.
            const std::string& source =
                sets[0].examples[rng() % sets[0].examples.size()];
            std::size_t take = source.size() / 2 + rng() % (source.size() / 2);
            std::size_t at = rng() % doc.size();
            doc = doc.substr(0, at) + " " + source.substr(0, take) + " " +
                  doc.substr(at);
            ++planted_count;
        }
        std::string id = "doc-" + std::to_string(i);
        ContaminationVerdict s = check_document(id, doc, pool, sampled);
        ContaminationVerdict e = check_document(id, doc, pool, exhaustive);

        // Soundness: a sampled positive must be an exhaustive positive.
        if (s.contaminated) CHECK(e.contaminated);
        CHECK(e.sampled_positions.empty());
        // The exhaustive verdict must agree with the brute-force oracle.
        CHECK(e.contaminated == oracle.document_contaminated(doc));
    }
    CHECK(planted_count > 200);  // the mix actually exercised both paths
}

TEST_CASE("evidence spans are verbatim pool content in exact mode") {
    std::mt19937_64 rng(37);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 10; ++i) {
        sets[0].examples.push_back(testsupport::random_ascii_words(rng, 40));
    }
    PoolConfig config;
    config.keep_exact_windows = true;
    SubstringPool pool = build_pool(sets, config);

    ScanConfig scan_config;
    scan_config.mode = ScanMode::kExhaustive;
    for (int i = 0; i < 50; ++i) {
        std::string doc = testsupport::random_ascii_words(rng, 50) + " " +
                          sets[0].examples[rng() % sets[0].examples.size()];
        ContaminationVerdict verdict =
            check_document("d", doc, pool, scan_config);
        REQUIRE(verdict.contaminated);
        NormalizedText norm = normalize(doc);
        for (const MatchSpan& m : verdict.matches) {
            if (m.source != MatchSource::kWindow) continue;
            // Every window inside the reported run is pool content.
            for (uint32_t k = m.normalized_start;
                 k + config.window_size <= m.normalized_end; ++k) {
                CHECK(pool.exact_contains(std::u32string_view(norm.text)
                                              .substr(k, config.window_size)));
            }
        }
    }
}

TEST_CASE("scan config is validated") {
    std::mt19937_64 rng(41);
    SubstringPool pool = build_pool(
        {{"b", {testsupport::random_ascii_words(rng, 30)}}}, PoolConfig{});
    ScanConfig config;
    config.sample_count = 0;
    CHECK_THROWS_AS(check_document("d", "text", pool, config), ConfigError);
}
