#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/test_helpers.hpp"

using testsupport::CliResult;
using testsupport::run_cli;
using testsupport::TempDir;

namespace {

std::string quoted(const std::filesystem::path& p) {
    return "'" + p.string() + "'";
}

void write_demo_inputs(const TempDir& dir) {
    nlohmann::json tests = {
        {"benchmarks",
         {{{"name", "demo"},
           {"examples",
            {"A teacher has three packages of stickers. One package contains "
             "56 stickers, another package contains 48 stickers, and the "
             "third package contains 58 stickers. If the teacher divides all "
             "the stickers equally among 27 students, how many stickers will "
             "each student receive?"}}}}}};
    testsupport::write_file(dir.file("tests.json"), tests.dump());

    std::ostringstream corpus;
    corpus << nlohmann::json{{"text",
                              "Nothing here relates to any benchmark at all; "
                              "it is a plain paragraph about harbors, tides, "
                              "and the slow drying of fishing nets on stone "
                              "walls by the sea."}}
                  .dump()
           << "\n";
    corpus << nlohmann::json{{"text",
                              "quiz dump: A teacher has three packages of "
                              "stickers. One package contains 56 stickers, "
                              "another package contains 48 stickers, and the "
                              "third package contains 58 stickers. If the "
                              "teacher divides all the stickers equally among "
                              "27 students, how many stickers will each "
                              "student receive? answer below"}}
                  .dump()
           << "\n";
    testsupport::write_file(dir.file("corpus.jsonl"), corpus.str());
}

}  // namespace

TEST_CASE("paper-constant defaults are wired into the CLI") {
    CliResult build_help = run_cli("build-pool --help");
    CHECK(build_help.exit_code == 0);
    // Default window size 50.
    CHECK(build_help.output.find("--window") != std::string::npos);
    CHECK(build_help.output.find("50") != std::string::npos);

    CliResult scan_help = run_cli("scan --help");
    CHECK(scan_help.exit_code == 0);
    // Default sample count 10.
    CHECK(scan_help.output.find("--samples") != std::string::npos);
    CHECK(scan_help.output.find("10") != std::string::npos);
}

TEST_CASE("build, inspect, scan, filter round trip") {
    TempDir dir("cli");
    write_demo_inputs(dir);

    CliResult build = run_cli("build-pool --tests " + quoted(dir.file("tests.json")) +
                              " --out " + quoted(dir.file("pool.dpl")));
    REQUIRE(build.exit_code == 0);
    CHECK(build.output.find("unique windows") != std::string::npos);

    CliResult inspect = run_cli("inspect --pool " + quoted(dir.file("pool.dpl")));
    CHECK(inspect.exit_code == 0);
    CHECK(inspect.output.find("window size:      50") != std::string::npos);
    CHECK(inspect.output.find("demo") != std::string::npos);

    CliResult scan = run_cli("scan --pool " + quoted(dir.file("pool.dpl")) +
                             " --corpus " + quoted(dir.file("corpus.jsonl")) +
                             " --report " + quoted(dir.file("report.json")) +
                             " --seed 3");
    CHECK(scan.exit_code == 3);  // contamination found
    CHECK(scan.output.find("contaminated: 1") != std::string::npos);

    auto report = nlohmann::json::parse(
        testsupport::read_file(dir.file("report.json")));
    CHECK(report["docs_total"] == 2);
    CHECK(report["docs_contaminated"] == 1);
    CHECK(report["per_benchmark_hits"]["demo"] == 1);

    CliResult filter = run_cli(
        "filter --pool " + quoted(dir.file("pool.dpl")) + " --corpus " +
        quoted(dir.file("corpus.jsonl")) + " --clean-out " +
        quoted(dir.file("clean.jsonl")) + " --dirty-out " +
        quoted(dir.file("dirty.jsonl")));
    CHECK(filter.exit_code == 3);

    std::string clean = testsupport::read_file(dir.file("clean.jsonl"));
    std::string dirty = testsupport::read_file(dir.file("dirty.jsonl"));
    CHECK(clean.find("harbors") != std::string::npos);
    CHECK(clean.find("quiz dump") == std::string::npos);
    CHECK(dirty.find("decontam_verdict") != std::string::npos);
}

TEST_CASE("scan of a clean corpus exits zero") {
    TempDir dir("cliclean");
    write_demo_inputs(dir);
    testsupport::write_file(
        dir.file("clean-corpus.jsonl"),
        nlohmann::json{{"text", "completely unrelated content"}}.dump() + "\n");
    REQUIRE(run_cli("build-pool --tests " + quoted(dir.file("tests.json")) +
                    " --out " + quoted(dir.file("pool.dpl")))
                .exit_code == 0);
    CliResult scan =
        run_cli("scan --pool " + quoted(dir.file("pool.dpl")) + " --corpus " +
                quoted(dir.file("clean-corpus.jsonl")));
    CHECK(scan.exit_code == 0);
    CHECK(scan.output.find("contaminated: 0") != std::string::npos);
}

TEST_CASE("usage and fatal errors use distinct exit codes") {
    CHECK(run_cli("").exit_code == 2);                    // no subcommand
    CHECK(run_cli("scan --pool x").exit_code == 2);       // missing required
    CHECK(run_cli("frobnicate").exit_code == 2);          // unknown command

    TempDir dir("clifatal");
    write_demo_inputs(dir);
    // Pool file does not exist: fatal, not usage.
    CliResult scan = run_cli("scan --pool " + quoted(dir.file("missing.dpl")) +
                             " --corpus " + quoted(dir.file("corpus.jsonl")));
    CHECK(scan.exit_code == 1);

    // Corrupted pool file: fatal with a format diagnostic.
    testsupport::write_file(dir.file("broken.dpl"), "XXXXGARBAGE");
    CliResult broken =
        run_cli("scan --pool " + quoted(dir.file("broken.dpl")) + " --corpus " +
                quoted(dir.file("corpus.jsonl")));
    CHECK(broken.exit_code == 1);
    CHECK(broken.output.find("magic") != std::string::npos);
}

TEST_CASE("exhaustive flag and report determinism") {
    TempDir dir("clidet");
    write_demo_inputs(dir);
    REQUIRE(run_cli("build-pool --tests " + quoted(dir.file("tests.json")) +
                    " --out " + quoted(dir.file("pool.dpl")))
                .exit_code == 0);

    std::string base = "scan --pool " + quoted(dir.file("pool.dpl")) +
                       " --corpus " + quoted(dir.file("corpus.jsonl")) +
                       " --seed 42 --no-timing --report ";
    REQUIRE(run_cli(base + quoted(dir.file("r1.json"))).exit_code == 3);
    REQUIRE(run_cli(base + quoted(dir.file("r2.json"))).exit_code == 3);
    CHECK(testsupport::read_file(dir.file("r1.json")) ==
          testsupport::read_file(dir.file("r2.json")));

    CliResult exhaustive = run_cli(
        "scan --exhaustive --pool " + quoted(dir.file("pool.dpl")) +
        " --corpus " + quoted(dir.file("corpus.jsonl")) + " --format json");
    CHECK(exhaustive.exit_code == 3);
}

TEST_CASE("niah-gen generates a grid from text files") {
    TempDir dir("cliniah");
    auto essays = dir.file("essays");
    std::filesystem::create_directories(essays);
    std::mt19937_64 rng(7);
    for (int d = 0; d < 20; ++d) {
        std::string content;
        for (int p = 0; p < 6; ++p) {
            if (p) content += "\n\n";
            content += testsupport::random_ascii_words(rng, 120);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "essay-%02d.txt", d);
        testsupport::write_file(essays / name, content);
    }

    CliResult gen = run_cli(
        "niah-gen --haystack " + quoted(essays) +
        " --lengths 1000,2000,4000 --depths 0,50,100 --seed 11 --out " +
        quoted(dir.file("niah.jsonl")));
    REQUIRE(gen.exit_code == 0);
    CHECK(gen.output.find("wrote 9 instances") != std::string::npos);

    std::ifstream is(dir.file("niah.jsonl"));
    std::string line;
    int count = 0;
    while (std::getline(is, line)) {
        auto record = nlohmann::json::parse(line);
        CHECK(record["language"] == "en");
        CHECK(record["context"].get<std::string>().find(
                  record["needle"].get<std::string>()) != std::string::npos);
        ++count;
    }
    CHECK(count == 9);
}

TEST_CASE("niah-gen honors a needle file") {
    TempDir dir("clineedle");
    auto essays = dir.file("essays");
    std::filesystem::create_directories(essays);
    std::mt19937_64 rng(8);
    for (int d = 0; d < 10; ++d) {
        testsupport::write_file(essays / ("doc" + std::to_string(d) + ".txt"),
                                testsupport::random_ascii_words(rng, 400));
    }
    nlohmann::json needles = {
        {"en",
         {{"needle", "The secret ingredient of the cake is toasted cardamom."},
          {"query", "What is the secret ingredient of the cake?"},
          {"instruction", "Answer from the document."}}}};
    testsupport::write_file(dir.file("needles.json"), needles.dump());

    CliResult gen = run_cli("niah-gen --haystack " + quoted(essays) +
                            " --needle-file " + quoted(dir.file("needles.json")) +
                            " --lengths 1500 --depths 50 --out " +
                            quoted(dir.file("out.jsonl")));
    REQUIRE(gen.exit_code == 0);
    auto record = nlohmann::json::parse(
        testsupport::read_file(dir.file("out.jsonl")));
    CHECK(record["needle"].get<std::string>().find("cardamom") !=
          std::string::npos);
    CHECK(record["gold_answer"] == record["needle"]);
}
