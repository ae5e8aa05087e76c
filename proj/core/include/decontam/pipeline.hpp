// Corpus-scale orchestration: parallel scans over streamed JSON-Lines,
// order-preserving filtered outputs, and report rendering. Verdicts are
// deterministic regardless of worker count; a bounded work queue keeps
// memory independent of corpus size.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "decontam/jsonl.hpp"
#include "decontam/scan.hpp"

namespace decontam {

inline constexpr int kReportVersion = 1;

struct ScanReport {
    uint64_t docs_total = 0;
    uint64_t docs_contaminated = 0;
    uint64_t docs_clean = 0;
    uint64_t docs_too_short = 0;
    uint64_t windows_sampled_total = 0;
    uint64_t window_hits_total = 0;
    uint64_t short_entry_hits_total = 0;
    double contamination_rate = 0.0;
    std::map<std::string, uint64_t> per_benchmark_hits;
    double wall_time_seconds = 0.0;
    uint64_t bytes_processed = 0;
    std::vector<IngestError> errors;
};

// Called once per document, in input order.
using VerdictSink =
    std::function<void(const ContaminationVerdict&, const CorpusDoc&)>;

// Scans every document of `reader`, invoking `sink` in input order.
// workers >= 1; ingestion errors become itemized report entries.
ScanReport scan_corpus(JsonlReader& reader, const SubstringPool& pool,
                       const ScanConfig& config, unsigned workers,
                       const VerdictSink& sink);

// Partitions the corpus: clean documents are written byte-identically to
// clean_out, contaminated ones to dirty_out with an attached verdict
// object. Unparseable lines also go to dirty_out, annotated, so the two
// outputs always partition the input. On a write failure a
// "<output>.partial" marker file is left next to the incomplete output.
ScanReport filter_corpus(JsonlReader& reader, const SubstringPool& pool,
                         const ScanConfig& config, unsigned workers,
                         const std::filesystem::path& clean_out,
                         const std::filesystem::path& dirty_out);

enum class ReportFormat { kJson, kText };

struct RenderOptions {
    // Timing fields vary run to run; exclude them when reports must be
    // byte-comparable.
    bool include_timing = true;
};

// Renders the report plus per-document evidence for the given verdicts
// (normally the contaminated subset). JSON output is stable-key-ordered and
// survives a parse/re-serialize round trip byte-identically.
std::string render_report(const ScanReport& report,
                          const std::vector<ContaminationVerdict>& verdicts,
                          ReportFormat format,
                          const RenderOptions& options = {});

}  // namespace decontam
