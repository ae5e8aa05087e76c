#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "decontam/errors.hpp"
#include "decontam/pipeline.hpp"
#include "support/test_helpers.hpp"

using namespace decontam;
using testsupport::TempDir;

namespace {

// Letters a..m only, so documents built from n..z can never collide.
std::string low_alphabet_text(std::mt19937_64& rng, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i && i % 8 == 0) out += ' ';
        out.push_back(static_cast<char>('a' + rng() % 13));
    }
    return out;
}

std::string high_alphabet_text(std::mt19937_64& rng, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i && i % 8 == 0) out += ' ';
        out.push_back(static_cast<char>('n' + rng() % 13));
    }
    return out;
}

std::string jsonl_record(const std::string& id, const std::string& text) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["text"] = text;
    return j.dump();
}

struct VerdictDigest {
    std::string doc_id;
    bool contaminated;
    std::vector<uint32_t> sampled;
    friend bool operator==(const VerdictDigest&, const VerdictDigest&) = default;
};

uint64_t vm_hwm_kb() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (std::getline(status, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            return std::stoull(line.substr(6));
        }
    }
    return 0;
}

}  // namespace

TEST_CASE("ingest yields docs in order with synthesized ids") {
    TempDir dir("ingest");
    auto path = dir.file("corpus.jsonl");
    testsupport::write_file(path, jsonl_record("a", "first doc") + "\n" +
                                      jsonl_record("b", "second doc") + "\n" +
                                      jsonl_record("c", "third doc") + "\n");
    JsonlReader reader(path, "text");
    std::vector<std::string> ids, texts;
    while (auto item = reader.next()) {
        REQUIRE(item->doc.has_value());
        CHECK(!item->error.has_value());
        ids.push_back(item->doc->doc_id);
        texts.push_back(item->doc->text);
    }
    CHECK(texts == std::vector<std::string>{"first doc", "second doc",
                                            "third doc"});
    CHECK(ids == std::vector<std::string>{"corpus.jsonl:1", "corpus.jsonl:2",
                                          "corpus.jsonl:3"});
}

TEST_CASE("ingest surfaces per-record errors and continues") {
    TempDir dir("ingest2");
    auto path = dir.file("corpus.jsonl");
    std::string invalid_utf8 = "{\"text\": \"bad \xFF byte\"}";
    testsupport::write_file(
        path, jsonl_record("a", "fine") + "\n" +
                  "{\"other_field\": \"no text here\"}\n" +
                  "this is not json\n" + invalid_utf8 + "\n" +
                  jsonl_record("b", "also fine") + "\n");
    JsonlReader reader(path, "text");
    int docs = 0, errors = 0;
    std::vector<uint64_t> error_lines;
    while (auto item = reader.next()) {
        if (item->doc) ++docs;
        if (item->error) {
            ++errors;
            error_lines.push_back(item->error->line_no);
            CHECK(!item->error->raw_line.empty());
        }
    }
    CHECK(docs == 2);
    CHECK(errors == 3);
    CHECK(error_lines == std::vector<uint64_t>{2, 3, 4});
}

TEST_CASE("ingest with explicit id field deduplicates") {
    TempDir dir("ingest3");
    auto path = dir.file("corpus.jsonl");
    testsupport::write_file(path, jsonl_record("same", "one") + "\n" +
                                      jsonl_record("same", "two") + "\n" +
                                      jsonl_record("other", "three") + "\n");
    JsonlReader reader(path, "text", "id");
    std::vector<std::string> ids;
    int warnings = 0;
    while (auto item = reader.next()) {
        if (item->doc) ids.push_back(item->doc->doc_id);
        if (item->error) ++warnings;
    }
    CHECK(ids == std::vector<std::string>{"same", "same#dup1", "other"});
    CHECK(warnings == 1);
}

TEST_CASE("ingest of a missing file is fatal") {
    CHECK_THROWS_AS(JsonlReader("/nonexistent/nope.jsonl", "text"), IoError);
}

TEST_CASE("scan_corpus verdicts independent of worker count") {
    std::mt19937_64 rng(51);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 10; ++i) {
        sets[0].examples.push_back(low_alphabet_text(rng, 120));
    }
    SubstringPool pool = build_pool(sets, PoolConfig{});

    TempDir dir("workers");
    auto path = dir.file("corpus.jsonl");
    std::ostringstream corpus;
    for (int i = 0; i < 400; ++i) {
        std::string text = (i % 5 == 0)
                               ? sets[0].examples[rng() % sets[0].examples.size()]
                               : high_alphabet_text(rng, 100 + rng() % 200);
        corpus << jsonl_record("doc-" + std::to_string(i), text) << "\n";
    }
    testsupport::write_file(path, corpus.str());

    ScanConfig config;
    config.global_seed = 11;

    auto run = [&](unsigned workers) {
        JsonlReader reader(path, "text", "id");
        std::vector<VerdictDigest> digests;
        ScanReport report =
            scan_corpus(reader, pool, config, workers,
                        [&](const ContaminationVerdict& v, const CorpusDoc&) {
                            digests.push_back({v.doc_id, v.contaminated,
                                               v.sampled_positions});
                        });
        return std::make_pair(digests, report);
    };

    auto [digest1, report1] = run(1);
    auto [digest4, report4] = run(4);
    auto [digest8, report8] = run(8);

    CHECK(digest1 == digest4);
    CHECK(digest1 == digest8);
    CHECK(report1.docs_total == 400);
    CHECK(report1.docs_contaminated == report4.docs_contaminated);
    CHECK(report1.docs_contaminated == report8.docs_contaminated);
    CHECK(report1.windows_sampled_total == report8.windows_sampled_total);
    CHECK(report1.window_hits_total == report8.window_hits_total);
    CHECK(report1.per_benchmark_hits == report8.per_benchmark_hits);
    CHECK(report1.docs_total ==
          report1.docs_contaminated + report1.docs_clean);
}

TEST_CASE("scan_corpus on an empty corpus reports zeros") {
    TempDir dir("empty");
    auto path = dir.file("corpus.jsonl");
    testsupport::write_file(path, "");
    std::mt19937_64 rng(52);
    SubstringPool pool = build_pool(
        {{"b", {low_alphabet_text(rng, 100)}}}, PoolConfig{});
    JsonlReader reader(path, "text");
    int verdicts = 0;
    ScanReport report = scan_corpus(
        reader, pool, ScanConfig{}, 2,
        [&](const ContaminationVerdict&, const CorpusDoc&) { ++verdicts; });
    CHECK(verdicts == 0);
    CHECK(report.docs_total == 0);
    CHECK(report.contamination_rate == 0.0);
}

TEST_CASE("planted contamination fraction is recovered exactly") {
    std::mt19937_64 rng(53);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 5; ++i) {
        sets[0].examples.push_back(low_alphabet_text(rng, 150));
    }
    SubstringPool pool = build_pool(sets, PoolConfig{});

    TempDir dir("planted");
    auto path = dir.file("corpus.jsonl");
    std::ostringstream corpus;
    const int kDocs = 500;
    for (int i = 0; i < kDocs; ++i) {
        // Exact fifth: full-document copies, which sampling detects with
        // certainty (every window of a copy is in the pool).
        std::string text = (i % 5 == 2)
                               ? sets[0].examples[i % sets[0].examples.size()]
                               : high_alphabet_text(rng, 120 + rng() % 100);
        corpus << jsonl_record("doc-" + std::to_string(i), text) << "\n";
    }
    testsupport::write_file(path, corpus.str());

    JsonlReader reader(path, "text", "id");
    ScanReport report =
        scan_corpus(reader, pool, ScanConfig{}, 4, nullptr);
    CHECK(report.docs_total == kDocs);
    CHECK(report.docs_contaminated == kDocs / 5);
    CHECK(report.contamination_rate == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("filter partitions the corpus and keeps clean bytes identical") {
    std::mt19937_64 rng(54);
    std::vector<TestSet> sets{{"bench", {}}};
    for (int i = 0; i < 5; ++i) {
        sets[0].examples.push_back(low_alphabet_text(rng, 150));
    }
    SubstringPool pool = build_pool(sets, PoolConfig{});

    TempDir dir("filter");
    auto path = dir.file("corpus.jsonl");
    std::ostringstream corpus;
    std::string expected_clean;
    std::vector<std::string> all_ids;
    for (int i = 0; i < 300; ++i) {
        bool dirty_doc = (i % 4 == 1);
        std::string id = "doc-" + std::to_string(i);
        all_ids.push_back(id);
        std::string line = jsonl_record(
            id, dirty_doc ? sets[0].examples[i % sets[0].examples.size()]
                          : high_alphabet_text(rng, 80 + rng() % 120));
        corpus << line << "\n";
        if (!dirty_doc) expected_clean += line + "\n";
    }
    // One unparseable line, which must land in dirty_out annotated.
    corpus << "{broken json\n";
    testsupport::write_file(path, corpus.str());

    JsonlReader reader(path, "text", "id");
    auto clean_path = dir.file("clean.jsonl");
    auto dirty_path = dir.file("dirty.jsonl");
    ScanReport report = filter_corpus(reader, pool, ScanConfig{}, 4,
                                      clean_path, dirty_path);

    CHECK(report.docs_total == 300);
    CHECK(report.docs_contaminated == 75);
    CHECK(report.errors.size() == 1);

    // Clean output: byte-identical to the clean input lines, in order.
    CHECK(testsupport::read_file(clean_path) == expected_clean);

    // Partition: clean ids + dirty ids == input ids (multiset equality).
    std::multiset<std::string> seen;
    std::ifstream clean_in(clean_path);
    std::string line;
    while (std::getline(clean_in, line)) {
        seen.insert(nlohmann::json::parse(line)["id"].get<std::string>());
    }
    std::ifstream dirty_in(dirty_path);
    int annotated_errors = 0;
    while (std::getline(dirty_in, line)) {
        auto record = nlohmann::json::parse(line);
        if (record.contains("decontam_error")) {
            ++annotated_errors;
            CHECK(record["raw_line"].get<std::string>() == "{broken json");
            continue;
        }
        REQUIRE(record.contains("decontam_verdict"));
        CHECK(record["decontam_verdict"]["contaminated"].get<bool>());
        seen.insert(record["id"].get<std::string>());
    }
    CHECK(annotated_errors == 1);
    CHECK(seen == std::multiset<std::string>(all_ids.begin(), all_ids.end()));
}

TEST_CASE("filter with only clean docs leaves dirty empty") {
    std::mt19937_64 rng(55);
    SubstringPool pool = build_pool(
        {{"b", {low_alphabet_text(rng, 150)}}}, PoolConfig{});
    TempDir dir("cleanonly");
    auto path = dir.file("corpus.jsonl");
    std::string content;
    for (int i = 0; i < 20; ++i) {
        content += jsonl_record("d" + std::to_string(i),
                                high_alphabet_text(rng, 100)) +
                   "\n";
    }
    testsupport::write_file(path, content);
    JsonlReader reader(path, "text", "id");
    filter_corpus(reader, pool, ScanConfig{}, 1, dir.file("clean.jsonl"),
                  dir.file("dirty.jsonl"));
    CHECK(testsupport::read_file(dir.file("clean.jsonl")) == content);
    CHECK(testsupport::read_file(dir.file("dirty.jsonl")).empty());
}

TEST_CASE("filter with only test-set copies leaves clean empty") {
    std::mt19937_64 rng(56);
    std::string example = low_alphabet_text(rng, 150);
    SubstringPool pool = build_pool({{"b", {example}}}, PoolConfig{});
    TempDir dir("dirtyonly");
    auto path = dir.file("corpus.jsonl");
    std::string content;
    for (int i = 0; i < 10; ++i) {
        content += jsonl_record("d" + std::to_string(i), example) + "\n";
    }
    testsupport::write_file(path, content);
    JsonlReader reader(path, "text", "id");
    ScanReport report =
        filter_corpus(reader, pool, ScanConfig{}, 1, dir.file("clean.jsonl"),
                      dir.file("dirty.jsonl"));
    CHECK(report.docs_contaminated == 10);
    CHECK(testsupport::read_file(dir.file("clean.jsonl")).empty());
}

TEST_CASE("json report round-trips byte-identically") {
    ScanReport report;
    report.docs_total = 10;
    report.docs_clean = 9;
    report.docs_contaminated = 1;
    report.contamination_rate = 0.1;
    report.per_benchmark_hits["bench"] = 1;
    report.errors.push_back({7, "line 7: invalid JSON or invalid UTF-8", ""});

    std::string rendered =
        render_report(report, {}, ReportFormat::kJson, {.include_timing = false});
    auto parsed = nlohmann::json::parse(rendered);
    CHECK(parsed.dump(2) + "\n" == rendered);
    CHECK(parsed["report_version"] == kReportVersion);
    CHECK(parsed["docs_total"] == 10);
    CHECK(!parsed.contains("wall_time_seconds"));

    std::string with_timing =
        render_report(report, {}, ReportFormat::kJson, {.include_timing = true});
    CHECK(nlohmann::json::parse(with_timing).contains("wall_time_seconds"));
}

TEST_CASE("text report shows zero contamination plainly") {
    ScanReport report;
    report.docs_total = 5;
    report.docs_clean = 5;
    std::string text = render_report(report, {}, ReportFormat::kText, {});
    CHECK(text.find("contaminated: 0") != std::string::npos);
}

TEST_CASE("text report marks the evidence span") {
    SubstringPool pool = build_pool(
        {{"mmlu",
          {"A teacher has three packages of stickers. One package contains 56 "
           "stickers, another package contains 48 stickers, and the third "
           "package contains 58 stickers. If the teacher divides all the "
           "stickers equally among 27 students, how many stickers will each "
           "student receive?"}}},
        PoolConfig{});
    std::string web =
        "seen online: A teacher has three packages of stickers. One package "
        "contains 56 stickers, another package contains 48 stickers, and the "
        "third package contains 58 stickers. If the teacher divides all the "
        "stickers equally among 27 students, how many stickers will each "
        "student receive? 6 stickers is correct";
    ContaminationVerdict verdict =
        check_document("web", web, pool, ScanConfig{});
    REQUIRE(verdict.contaminated);

    ScanReport report;
    report.docs_total = 1;
    report.docs_contaminated = 1;
    report.contamination_rate = 1.0;
    std::string text =
        render_report(report, {verdict}, ReportFormat::kText, {});
    CHECK(text.find("A teacher has three packages of stickers") !=
          std::string::npos);
    CHECK(text.find("[[") != std::string::npos);
    CHECK(text.find("]]") != std::string::npos);
}

TEST_CASE("streaming keeps memory bounded as the corpus grows") {
    std::mt19937_64 rng(57);
    SubstringPool pool = build_pool(
        {{"b", {low_alphabet_text(rng, 150)}}}, PoolConfig{});

    TempDir dir("memory");
    auto make_corpus = [&](const std::filesystem::path& path, int docs) {
        std::ofstream os(path, std::ios::binary);
        std::mt19937_64 gen(58);
        for (int i = 0; i < docs; ++i) {
            os << jsonl_record("d" + std::to_string(i),
                               high_alphabet_text(gen, 1500))
               << "\n";
        }
    };
    auto scan_file = [&](const std::filesystem::path& path) {
        JsonlReader reader(path, "text", "id");
        scan_corpus(reader, pool, ScanConfig{}, 2, nullptr);
    };

    auto small = dir.file("small.jsonl");
    auto large = dir.file("large.jsonl");
    make_corpus(small, 8000);    // ~15 MB
    make_corpus(large, 24000);   // ~45 MB
    scan_file(small);
    uint64_t after_small_kb = vm_hwm_kb();
    scan_file(large);
    uint64_t after_large_kb = vm_hwm_kb();

    // Tripling the corpus must not grow peak memory by anything close to
    // the file-size delta (~30 MB); allow generous slack for the allocator.
    CHECK(after_large_kb - after_small_kb < 16 * 1024);
}
