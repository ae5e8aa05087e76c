#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "decontam/errors.hpp"
#include "decontam/niah.hpp"
#include "decontam/unicode.hpp"
#include "support/test_helpers.hpp"

using namespace decontam;
using testsupport::TempDir;

namespace {

std::string english_sentence(std::mt19937_64& rng) {
    static const char* kWords[] = {
        "the",   "quiet",  "harbor", "keeps",  "its",    "boats",  "under",
        "grey",  "skies",  "while",  "gulls",  "circle", "above",  "old",
        "piers", "and",    "nets",   "dry",    "slowly", "beside", "stone",
        "walls", "waiting","for",    "tide",   "wind",   "salt",   "light"};
    std::ostringstream out;
    int words = 8 + static_cast<int>(rng() % 8);
    for (int i = 0; i < words; ++i) {
        if (i) out << ' ';
        out << kWords[rng() % (sizeof(kWords) / sizeof(kWords[0]))];
    }
    out << '.';
    return out.str();
}

std::string korean_sentence(std::mt19937_64& rng) {
    std::string out;
    int words = 5 + static_cast<int>(rng() % 6);
    for (int i = 0; i < words; ++i) {
        if (i) out += ' ';
        int syllables = 2 + static_cast<int>(rng() % 3);
        for (int s = 0; s < syllables; ++s) {
            uni::append_utf8(out, static_cast<char32_t>(0xAC00 + rng() % 11172));
        }
    }
    out += (rng() % 4 == 0) ? "\xE3\x80\x82" : ".";  // mix 。 and .
    return out;
}

HaystackCorpus synthetic_corpus(bool korean, uint64_t seed, int docs = 40) {
    std::mt19937_64 rng(seed);
    HaystackCorpus corpus;
    for (int d = 0; d < docs; ++d) {
        HaystackCorpus::Doc doc;
        doc.name = "doc-" + std::to_string(d);
        int paragraphs = 4 + static_cast<int>(rng() % 6);
        for (int p = 0; p < paragraphs; ++p) {
            std::string para;
            int sentences = 4 + static_cast<int>(rng() % 5);
            for (int s = 0; s < sentences; ++s) {
                if (s) para += ' ';
                para += korean ? korean_sentence(rng) : english_sentence(rng);
            }
            doc.paragraphs.push_back(std::move(para));
        }
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

void write_corpus_dir(const HaystackCorpus& corpus,
                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    int i = 0;
    for (const auto& doc : corpus.docs) {
        char name[32];
        std::snprintf(name, sizeof(name), "essay-%03d.txt", i++);
        std::string content;
        for (const auto& p : doc.paragraphs) {
            if (!content.empty()) content += "\n\n";
            content += p;
        }
        testsupport::write_file(dir / name, content);
    }
}

}  // namespace

TEST_CASE("length counter counts scalar values") {
    LengthCounter chars("chars", "");
    CHECK(chars.measure("") == 0);
    CHECK(chars.measure("abc def") == 7);
    CHECK(chars.measure("한국어") == 3);
    CHECK(chars.measure("caf\xc3\xa9") == 4);
}

TEST_CASE("length counter can shell out to an external command") {
    LengthCounter bytes("command", "wc -c");
    CHECK(bytes.measure("12345") == 5);
    CHECK(bytes.measure("한") == 3);  // bytes, per the external tool
    CHECK_THROWS_AS(LengthCounter("command", ""), ConfigError);
    CHECK_THROWS_AS(LengthCounter("tokens", ""), ConfigError);
}

TEST_CASE("assemble_haystack hits the target within five percent") {
    HaystackCorpus corpus = synthetic_corpus(false, 101);
    LengthCounter counter("chars", "");
    const NiahText& text = default_niah_text("en");

    for (uint64_t target : {1000, 5000, 20000}) {
        std::string hay = assemble_haystack(corpus, target, counter,
                                            text.needle, 0);
        uint64_t len = counter.measure(hay);
        CHECK(len >= target - target / 20);
        CHECK(len <= target + target / 20);
        CHECK(hay.find(text.needle) == std::string::npos);
    }
}

TEST_CASE("assemble_haystack lengths are monotone over a grid") {
    HaystackCorpus corpus = synthetic_corpus(false, 102);
    LengthCounter counter("chars", "");
    uint64_t previous = 0;
    for (uint64_t target : default_niah_lengths()) {
        std::string hay =
            assemble_haystack(corpus, target, counter, "unused needle", 3);
        uint64_t len = counter.measure(hay);
        CHECK(len > previous);
        previous = len;
    }
}

TEST_CASE("assemble_haystack rejects needle collisions naming the doc") {
    HaystackCorpus corpus = synthetic_corpus(false, 103, 5);
    corpus.docs[2].paragraphs[1] +=
        " The best thing to do in San Francisco is eat a sandwich and sit in "
        "Dolores Park on a sunny day.";
    LengthCounter counter("chars", "");
    try {
        assemble_haystack(corpus, 100000, counter,
                          default_niah_text("en").needle, 0);
        FAIL("expected NeedleCollisionError");
    } catch (const NeedleCollisionError& e) {
        CHECK(e.document() == "doc-2");
    }
}

TEST_CASE("assemble_haystack reports an exhausted corpus") {
    HaystackCorpus corpus = synthetic_corpus(false, 104, 2);
    LengthCounter counter("chars", "");
    CHECK_THROWS_AS(
        assemble_haystack(corpus, 10'000'000, counter, "needle", 0),
        InsufficientCorpusError);
}

TEST_CASE("embed_needle at the extremes") {
    HaystackCorpus corpus = synthetic_corpus(false, 105);
    LengthCounter counter("chars", "");
    const NiahText& text = default_niah_text("en");
    std::string hay = assemble_haystack(corpus, 4000, counter, text.needle, 0);

    EmbedResult at_start = embed_needle(hay, text.needle, 0.0, counter, 2.0);
    CHECK(at_start.context.rfind(text.needle, 0) == 0);  // starts with
    CHECK(at_start.actual_depth_pct == doctest::Approx(0.0).epsilon(1e-9));

    EmbedResult at_end = embed_needle(hay, text.needle, 100.0, counter, 2.0);
    CHECK(at_end.context.size() >= text.needle.size());
    CHECK(at_end.context.substr(at_end.context.size() - text.needle.size()) ==
          text.needle);
    CHECK(at_end.actual_depth_pct == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("embed_needle depth accuracy across the grid") {
    HaystackCorpus corpus = synthetic_corpus(false, 106);
    LengthCounter counter("chars", "");
    const NiahText& text = default_niah_text("en");
    std::string hay = assemble_haystack(corpus, 32000, counter, text.needle, 1);

    for (double depth : default_niah_depths()) {
        EmbedResult embedded =
            embed_needle(hay, text.needle, depth, counter, 2.0);
        CHECK(std::abs(embedded.actual_depth_pct - depth) <= 2.0);
        // Exactly one occurrence.
        std::size_t first = embedded.context.find(text.needle);
        REQUIRE(first != std::string::npos);
        CHECK(embedded.context.find(text.needle, first + 1) ==
              std::string::npos);
    }
}

TEST_CASE("generate_grid writes the full grid with valid instances") {
    TempDir dir("niahgrid");
    write_corpus_dir(synthetic_corpus(false, 107), dir.file("essays"));

    NiahSpec spec;
    spec.language = "en";
    spec.haystack_source = dir.file("essays");
    spec.lengths = {1000, 2000, 4000, 8000};
    spec.depths = {0, 25, 50, 75, 100};
    spec.seed = 9;

    auto out = dir.file("niah.jsonl");
    GridResult result = generate_grid(spec, out);
    CHECK(result.written == 20);
    CHECK(result.failures.empty());

    std::ifstream is(out);
    std::string line;
    int instances = 0;
    while (std::getline(is, line)) {
        auto record = nlohmann::json::parse(line);
        ++instances;
        std::string context = record["context"].get<std::string>();
        std::string needle = record["needle"].get<std::string>();
        uint64_t target_length = record["target_length"].get<uint64_t>();
        uint64_t actual_length = record["actual_length"].get<uint64_t>();
        double target_depth = record["target_depth_pct"].get<double>();
        double actual_depth = record["actual_depth_pct"].get<double>();

        std::size_t first = context.find(needle);
        REQUIRE(first != std::string::npos);
        CHECK(context.find(needle, first + 1) == std::string::npos);
        CHECK(std::abs(actual_depth - target_depth) <= 5.0);
        double len_err = std::abs(static_cast<double>(actual_length) -
                                  static_cast<double>(target_length));
        CHECK(len_err <= 0.05 * static_cast<double>(target_length));
        CHECK(record["gold_answer"] == needle);
        CHECK(record["language"] == "en");
        CHECK(!record["query"].get<std::string>().empty());
        CHECK(!record["instruction"].get<std::string>().empty());
    }
    CHECK(instances == 20);
}

TEST_CASE("generate_grid is deterministic for a fixed seed") {
    TempDir dir("niahdet");
    write_corpus_dir(synthetic_corpus(false, 108), dir.file("essays"));

    NiahSpec spec;
    spec.haystack_source = dir.file("essays");
    spec.lengths = {1500, 3000};
    spec.depths = {0, 50, 100};
    spec.seed = 1234;

    auto out1 = dir.file("a.jsonl");
    auto out2 = dir.file("b.jsonl");
    generate_grid(spec, out1);
    generate_grid(spec, out2);
    CHECK(testsupport::read_file(out1) == testsupport::read_file(out2));

    spec.seed = 4321;
    auto out3 = dir.file("c.jsonl");
    generate_grid(spec, out3);  // different rotation, still valid
    CHECK(!testsupport::read_file(out3).empty());
}

TEST_CASE("korean defaults generate with the same guarantees") {
    TempDir dir("niahko");
    write_corpus_dir(synthetic_corpus(true, 109), dir.file("books"));

    NiahSpec spec;
    spec.language = "ko";
    spec.haystack_source = dir.file("books");
    spec.lengths = {1000, 4000, 16000};
    spec.depths = {0, 30, 60, 100};
    spec.seed = 5;

    auto out = dir.file("niah-ko.jsonl");
    GridResult result = generate_grid(spec, out);
    CHECK(result.written == 12);
    CHECK(result.failures.empty());

    const NiahText& text = default_niah_text("ko");
    std::ifstream is(out);
    std::string line;
    while (std::getline(is, line)) {
        auto record = nlohmann::json::parse(line);
        CHECK(record["needle"] == text.needle);
        CHECK(record["query"] == text.query);
        std::string context = record["context"].get<std::string>();
        std::size_t first = context.find(text.needle);
        REQUIRE(first != std::string::npos);
        CHECK(context.find(text.needle, first + 1) == std::string::npos);
        CHECK(std::abs(record["actual_depth_pct"].get<double>() -
                       record["target_depth_pct"].get<double>()) <= 5.0);
    }
}

TEST_CASE("generate_grid validates its spec") {
    TempDir dir("niahval");
    write_corpus_dir(synthetic_corpus(false, 110, 3), dir.file("essays"));
    NiahSpec spec;
    spec.haystack_source = dir.file("essays");

    SUBCASE("depths out of range") {
        spec.depths = {0, 50, 101};
        CHECK_THROWS_AS(generate_grid(spec, dir.file("out.jsonl")), ConfigError);
    }
    SUBCASE("lengths not increasing") {
        spec.lengths = {2000, 1000};
        CHECK_THROWS_AS(generate_grid(spec, dir.file("out.jsonl")), ConfigError);
    }
    SUBCASE("unknown language") {
        spec.language = "fr";
        CHECK_THROWS_AS(generate_grid(spec, dir.file("out.jsonl")), ConfigError);
    }
}

TEST_CASE("grid cells that cannot assemble are reported, not fatal") {
    TempDir dir("niahfail");
    write_corpus_dir(synthetic_corpus(false, 111, 2), dir.file("tiny"));
    NiahSpec spec;
    spec.haystack_source = dir.file("tiny");
    spec.lengths = {1000, 500000};  // second one cannot be assembled
    spec.depths = {0, 100};
    GridResult result = generate_grid(spec, dir.file("out.jsonl"));
    CHECK(result.written == 2);
    REQUIRE(result.failures.size() == 2);
    CHECK(result.failures[0].target_length == 500000);
}
