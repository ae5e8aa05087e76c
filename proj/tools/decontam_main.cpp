// decontam: build substring pools from benchmark test sets, scan or filter
// training corpora against them, and generate needle-in-a-haystack
// long-context test sets.
//
// Exit codes: 0 = ran, no contamination; 3 = ran, contamination found;
//             1 = fatal error; 2 = usage error.
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "decontam/errors.hpp"
#include "decontam/jsonl.hpp"
#include "decontam/niah.hpp"
#include "decontam/pipeline.hpp"
#include "decontam/pool.hpp"
#include "decontam/scan.hpp"
#include "decontam/unicode.hpp"

namespace {

using namespace decontam;

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitContaminated = 3;

std::string json_value_to_text(const nlohmann::json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_array()) {
        std::string joined;
        for (const auto& element : value) {
            if (!joined.empty()) joined += " ";
            joined += json_value_to_text(element);
        }
        return joined;
    }
    return value.dump();
}

// Test-set spec file:
// {"benchmarks": [{"name": ..., "path": examples.jsonl, "fields": [...]},
//                 {"name": ..., "examples": ["inline text", ...]}]}
// Multi-field examples are flattened with single-space separators so
// windows can straddle field boundaries the way copied text does.
std::vector<TestSet> load_test_sets(const std::filesystem::path& spec_path) {
    std::ifstream is(spec_path);
    if (!is) {
        throw IoError("cannot open test-set spec: " + spec_path.string());
    }
    nlohmann::json spec;
    try {
        is >> spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("test-set spec is not valid JSON: " +
                          std::string(e.what()));
    }
    if (!spec.is_object() || !spec.contains("benchmarks") ||
        !spec["benchmarks"].is_array()) {
        throw ConfigError("test-set spec must be {\"benchmarks\": [...]}");
    }

    std::vector<TestSet> sets;
    for (const auto& bench : spec["benchmarks"]) {
        TestSet set;
        set.name = bench.value("name", "benchmark-" + std::to_string(sets.size()));
        if (bench.contains("examples")) {
            for (const auto& example : bench["examples"]) {
                set.examples.push_back(json_value_to_text(example));
            }
        } else if (bench.contains("path")) {
            std::filesystem::path path = bench["path"].get<std::string>();
            if (path.is_relative()) {
                path = spec_path.parent_path() / path;
            }
            std::vector<std::string> fields;
            if (bench.contains("fields")) {
                for (const auto& f : bench["fields"]) {
                    fields.push_back(f.get<std::string>());
                }
            } else {
                fields.push_back("text");
            }
            std::ifstream example_stream(path, std::ios::binary);
            if (!example_stream) {
                throw IoError("cannot open benchmark file: " + path.string());
            }
            std::string line;
            uint64_t line_no = 0;
            while (std::getline(example_stream, line)) {
                ++line_no;
                nlohmann::json record = nlohmann::json::parse(
                    line, nullptr, /*allow_exceptions=*/false);
                if (record.is_discarded() || !record.is_object()) {
                    throw ConfigError(path.string() + ":" +
                                      std::to_string(line_no) +
                                      ": invalid JSON record");
                }
                std::string flattened;
                for (const std::string& field : fields) {
                    if (!record.contains(field)) continue;
                    std::string piece = json_value_to_text(record[field]);
                    if (piece.empty()) continue;
                    if (!flattened.empty()) flattened += " ";
                    flattened += piece;
                }
                set.examples.push_back(std::move(flattened));
            }
        } else {
            throw ConfigError("benchmark '" + set.name +
                              "' needs either \"examples\" or \"path\"");
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

int cmd_build_pool(const std::string& tests_path, uint32_t window,
                   uint64_t seed, bool exact, const std::string& out_path) {
    PoolConfig config;
    config.window_size = window;
    config.fingerprint_seed = seed;
    config.keep_exact_windows = exact;

    std::vector<TestSet> sets = load_test_sets(tests_path);
    SubstringPool pool = build_pool(sets, config);
    save_pool(pool, out_path);

    uint64_t examples = 0;
    for (const auto& prov : pool.provenance()) examples += prov.example_count;
    std::cout << "pool written to " << out_path << "\n"
              << "  benchmarks:       " << pool.provenance().size() << "\n"
              << "  examples:         " << examples << "\n"
              << "  windows seen:     " << pool.total_windows_seen() << "\n"
              << "  unique windows:   " << pool.fingerprints().size() << "\n"
              << "  short entries:    " << pool.short_entries().size() << "\n";
    return kExitOk;
}

struct ScanCliOptions {
    std::string pool_path;
    std::string corpus_path;
    std::string text_field = "text";
    std::string id_field;
    uint32_t samples = kDefaultSampleCount;
    uint64_t seed = 0;
    bool exhaustive = false;
    unsigned workers = 1;
    uint32_t context_chars = 40;
    std::string report_path;
    std::string verdicts_path;
    std::string format = "text";
    bool no_timing = false;
    uint64_t max_evidence_docs = 1000;
};

int cmd_scan(const ScanCliOptions& options) {
    SubstringPool pool = load_pool(options.pool_path);
    ScanConfig config;
    config.sample_count = options.samples;
    config.global_seed = options.seed;
    config.mode = options.exhaustive ? ScanMode::kExhaustive : ScanMode::kSampled;
    config.evidence_context_chars = options.context_chars;

    JsonlReader reader(options.corpus_path, options.text_field,
                       options.id_field);

    std::optional<std::ofstream> verdict_stream;
    if (!options.verdicts_path.empty()) {
        verdict_stream.emplace(options.verdicts_path,
                               std::ios::binary | std::ios::trunc);
        if (!*verdict_stream) {
            throw IoError("cannot open verdict output: " + options.verdicts_path);
        }
    }

    std::vector<ContaminationVerdict> contaminated;
    auto sink = [&](const ContaminationVerdict& verdict, const CorpusDoc&) {
        if (verdict.contaminated &&
            contaminated.size() < options.max_evidence_docs) {
            contaminated.push_back(verdict);
        }
        if (verdict_stream) {
            nlohmann::json j{{"doc_id", verdict.doc_id},
                             {"contaminated", verdict.contaminated},
                             {"windows_available", verdict.windows_available},
                             {"skipped_too_short", verdict.skipped_too_short},
                             {"sampled_positions", verdict.sampled_positions}};
            *verdict_stream << j.dump() << '\n';
        }
    };

    ScanReport report =
        scan_corpus(reader, pool, config, options.workers, sink);

    RenderOptions render;
    render.include_timing = !options.no_timing;
    if (!options.report_path.empty()) {
        std::ofstream report_stream(options.report_path,
                                    std::ios::binary | std::ios::trunc);
        if (!report_stream) {
            throw IoError("cannot open report output: " + options.report_path);
        }
        report_stream << render_report(report, contaminated,
                                       ReportFormat::kJson, render);
    }
    ReportFormat stdout_format =
        options.format == "json" ? ReportFormat::kJson : ReportFormat::kText;
    std::cout << render_report(report, contaminated, stdout_format, render);

    return report.docs_contaminated > 0 ? kExitContaminated : kExitOk;
}

int cmd_filter(const ScanCliOptions& options, const std::string& clean_out,
               const std::string& dirty_out) {
    SubstringPool pool = load_pool(options.pool_path);
    ScanConfig config;
    config.sample_count = options.samples;
    config.global_seed = options.seed;
    config.mode = options.exhaustive ? ScanMode::kExhaustive : ScanMode::kSampled;
    config.evidence_context_chars = options.context_chars;

    JsonlReader reader(options.corpus_path, options.text_field,
                       options.id_field);
    ScanReport report = filter_corpus(reader, pool, config, options.workers,
                                      clean_out, dirty_out);

    RenderOptions render;
    render.include_timing = !options.no_timing;
    if (!options.report_path.empty()) {
        std::ofstream report_stream(options.report_path,
                                    std::ios::binary | std::ios::trunc);
        if (!report_stream) {
            throw IoError("cannot open report output: " + options.report_path);
        }
        report_stream << render_report(report, {}, ReportFormat::kJson, render);
    }
    std::cout << render_report(report, {}, ReportFormat::kText, render);
    std::cout << "clean output: " << clean_out << "\n"
              << "dirty output: " << dirty_out << "\n";

    return report.docs_contaminated > 0 ? kExitContaminated : kExitOk;
}

int cmd_inspect(const std::string& pool_path) {
    SubstringPool pool = load_pool(pool_path);
    std::cout << "pool file: " << pool_path << "\n"
              << "  window size:      " << pool.window_size() << "\n"
              << "  fingerprint seed: " << pool.config().fingerprint_seed << "\n"
              << "  unique windows:   " << pool.fingerprints().size() << "\n"
              << "  windows seen:     " << pool.total_windows_seen() << "\n"
              << "  short entries:    " << pool.short_entries().size() << "\n"
              << "  benchmarks:\n";
    for (const auto& prov : pool.provenance()) {
        std::cout << "    " << prov.name << ": " << prov.example_count
                  << " examples, " << prov.window_count << " windows\n";
    }
    return kExitOk;
}

struct NiahCliOptions {
    std::string haystack;
    std::string needle_file;
    std::string language = "en";
    std::vector<uint64_t> lengths;
    std::vector<double> depths;
    std::string unit = "chars";
    std::string counter_cmd;
    std::string out = "niah.jsonl";
    uint64_t seed = 0;
    double depth_tolerance = 2.0;
    std::string text_field = "text";
};

int cmd_niah_gen(const NiahCliOptions& options) {
    NiahSpec spec;
    spec.language = options.language;
    spec.haystack_source = options.haystack;
    spec.haystack_text_field = options.text_field;
    spec.lengths = options.lengths;
    spec.depths = options.depths;
    spec.length_unit = options.unit;
    spec.counter_command = options.counter_cmd;
    spec.seed = options.seed;
    spec.depth_tolerance_pct = options.depth_tolerance;

    if (!options.needle_file.empty()) {
        std::ifstream is(options.needle_file);
        if (!is) {
            throw IoError("cannot open needle file: " + options.needle_file);
        }
        nlohmann::json doc;
        try {
            is >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("needle file is not valid JSON: " +
                              std::string(e.what()));
        }
        if (!doc.contains(options.language)) {
            throw ConfigError("needle file has no entry for language '" +
                              options.language + "'");
        }
        const auto& entry = doc[options.language];
        spec.text.needle = entry.value("needle", "");
        spec.text.query = entry.value("query", "");
        spec.text.instruction = entry.value("instruction", "");
        if (spec.text.needle.empty()) {
            throw ConfigError("needle file entry has an empty needle");
        }
    }

    GridResult result = generate_grid(spec, options.out);
    std::cout << "wrote " << result.written << " instances to " << options.out
              << "\n";
    if (!result.failures.empty()) {
        std::cerr << result.failures.size() << " grid cells failed:\n";
        for (const CellFailure& failure : result.failures) {
            std::cerr << "  length " << failure.target_length << ", depth "
                      << failure.target_depth_pct << ": " << failure.message
                      << "\n";
        }
        return kExitFatal;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpus decontamination and long-context test generation"};
    app.require_subcommand(1);

    // build-pool
    auto* build = app.add_subcommand(
        "build-pool", "build a substring pool from benchmark test sets");
    std::string tests_path, pool_out = "pool.dpl";
    uint32_t window = kDefaultWindowSize;
    uint64_t fp_seed = kDefaultFingerprintSeed;
    bool exact = false;
    build->add_option("--tests", tests_path, "test-set spec JSON")->required();
    build->add_option("--window", window, "window size in normalized chars")
        ->capture_default_str();
    build->add_option("--fingerprint-seed", fp_seed, "fingerprint hash seed")
        ->capture_default_str();
    build->add_flag("--exact", exact, "retain exact window strings (audit)");
    build->add_option("--out", pool_out, "output pool file")
        ->capture_default_str();

    // scan
    auto* scan = app.add_subcommand("scan", "scan a corpus for contamination");
    ScanCliOptions scan_options;
    scan->add_option("--pool", scan_options.pool_path, "pool file")->required();
    scan->add_option("--corpus", scan_options.corpus_path, "JSONL corpus")
        ->required();
    scan->add_option("--samples", scan_options.samples,
                     "random windows sampled per document")
        ->capture_default_str();
    scan->add_option("--seed", scan_options.seed, "global sampling seed")
        ->capture_default_str();
    scan->add_flag("--exhaustive", scan_options.exhaustive,
                   "check every window (oracle mode)");
    scan->add_option("--workers", scan_options.workers, "worker threads")
        ->capture_default_str();
    scan->add_option("--text-field", scan_options.text_field,
                     "JSON field holding the document text")
        ->capture_default_str();
    scan->add_option("--id-field", scan_options.id_field,
                     "JSON field holding the document id");
    scan->add_option("--report", scan_options.report_path,
                     "write a JSON report here");
    scan->add_option("--verdicts", scan_options.verdicts_path,
                     "write per-document verdicts (JSONL) here");
    scan->add_option("--format", scan_options.format, "stdout format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    scan->add_option("--context", scan_options.context_chars,
                     "evidence context characters")
        ->capture_default_str();
    scan->add_option("--max-evidence", scan_options.max_evidence_docs,
                     "max contaminated docs carried into the report")
        ->capture_default_str();
    scan->add_flag("--no-timing", scan_options.no_timing,
                   "omit timing from reports (byte-comparable output)");

    // filter
    auto* filter = app.add_subcommand(
        "filter", "split a corpus into clean and contaminated outputs");
    ScanCliOptions filter_options;
    std::string clean_out, dirty_out;
    filter->add_option("--pool", filter_options.pool_path, "pool file")
        ->required();
    filter->add_option("--corpus", filter_options.corpus_path, "JSONL corpus")
        ->required();
    filter->add_option("--clean-out", clean_out, "clean output path")
        ->required();
    filter->add_option("--dirty-out", dirty_out, "contaminated output path")
        ->required();
    filter->add_option("--samples", filter_options.samples,
                       "random windows sampled per document")
        ->capture_default_str();
    filter->add_option("--seed", filter_options.seed, "global sampling seed")
        ->capture_default_str();
    filter->add_flag("--exhaustive", filter_options.exhaustive,
                     "check every window (oracle mode)");
    filter->add_option("--workers", filter_options.workers, "worker threads")
        ->capture_default_str();
    filter->add_option("--text-field", filter_options.text_field,
                       "JSON field holding the document text")
        ->capture_default_str();
    filter->add_option("--id-field", filter_options.id_field,
                       "JSON field holding the document id");
    filter->add_option("--report", filter_options.report_path,
                       "write a JSON report here");
    filter->add_flag("--no-timing", filter_options.no_timing,
                     "omit timing from reports");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print pool file contents");
    std::string inspect_pool;
    inspect->add_option("--pool", inspect_pool, "pool file")->required();

    // niah-gen
    auto* niah = app.add_subcommand(
        "niah-gen", "generate needle-in-a-haystack long-context instances");
    NiahCliOptions niah_options;
    niah->add_option("--haystack", niah_options.haystack,
                     "distractor corpus: directory of .txt or a JSONL file")
        ->required();
    niah->add_option("--needle-file", niah_options.needle_file,
                     "JSON with needle/query/instruction per language");
    niah->add_option("--language", niah_options.language, "en or ko")
        ->capture_default_str();
    niah->add_option("--lengths", niah_options.lengths,
                     "target lengths, comma separated")
        ->delimiter(',');
    niah->add_option("--depths", niah_options.depths,
                     "depth percentages, comma separated")
        ->delimiter(',');
    niah->add_option("--unit", niah_options.unit, "length unit")
        ->check(CLI::IsMember({"chars", "command"}))
        ->capture_default_str();
    niah->add_option("--counter-cmd", niah_options.counter_cmd,
                     "external counter: reads stdin, prints a count");
    niah->add_option("--out", niah_options.out, "output JSONL path")
        ->capture_default_str();
    niah->add_option("--seed", niah_options.seed, "generation seed")
        ->capture_default_str();
    niah->add_option("--depth-tolerance", niah_options.depth_tolerance,
                     "max boundary-snap depth error, percentage points")
        ->capture_default_str();
    niah->add_option("--text-field", niah_options.text_field,
                     "text field for JSONL haystacks")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (build->parsed()) {
            return cmd_build_pool(tests_path, window, fp_seed, exact, pool_out);
        }
        if (scan->parsed()) {
            return cmd_scan(scan_options);
        }
        if (filter->parsed()) {
            return cmd_filter(filter_options, clean_out, dirty_out);
        }
        if (inspect->parsed()) {
            return cmd_inspect(inspect_pool);
        }
        if (niah->parsed()) {
            return cmd_niah_gen(niah_options);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitUsage;
}
