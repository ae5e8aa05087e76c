#include "decontam/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "decontam/errors.hpp"

namespace decontam {

namespace {

struct Task {
    uint64_t seq = 0;
    JsonlReader::Item item;
};

struct Result {
    JsonlReader::Item item;
    ContaminationVerdict verdict;  // valid only when item.doc is set
};

// Bounded single-producer multi-consumer queue.
class TaskQueue {
public:
    explicit TaskQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(Task task) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return queue_.size() < capacity_ || closed_; });
        if (closed_) return;
        queue_.push_back(std::move(task));
        not_empty_.notify_one();
    }

    bool pop(Task& out) {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
        if (queue_.empty()) return false;
        out = std::move(queue_.front());
        queue_.pop_front();
        not_full_.notify_one();
        return true;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

private:
    std::size_t capacity_;
    std::deque<Task> queue_;
    std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    bool closed_ = false;
};

// Reorder buffer: workers deposit out of order, the collector drains in
// sequence. Bounded in practice by queue capacity + worker count.
class ResultBuffer {
public:
    void put(uint64_t seq, Result result) {
        std::lock_guard lock(mutex_);
        results_.emplace(seq, std::move(result));
        ready_.notify_all();
    }

    // Blocks until `seq` is available or no more results can arrive.
    bool take(uint64_t seq, Result& out) {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] {
            return results_.count(seq) != 0 || (done_ && results_.empty());
        });
        auto it = results_.find(seq);
        if (it == results_.end()) return false;
        out = std::move(it->second);
        results_.erase(it);
        return true;
    }

    void mark_done() {
        std::lock_guard lock(mutex_);
        done_ = true;
        ready_.notify_all();
    }

private:
    std::map<uint64_t, Result> results_;
    std::mutex mutex_;
    std::condition_variable ready_;
    bool done_ = false;
};

void aggregate(ScanReport& report, const ContaminationVerdict& verdict) {
    ++report.docs_total;
    if (verdict.contaminated) {
        ++report.docs_contaminated;
    } else {
        ++report.docs_clean;
    }
    if (verdict.skipped_too_short) ++report.docs_too_short;
    report.windows_sampled_total += verdict.windows_tested;
    report.window_hits_total += verdict.window_probe_hits;
    report.short_entry_hits_total += verdict.short_entry_hits;
    for (const MatchSpan& match : verdict.matches) {
        ++report.per_benchmark_hits[match.benchmark.empty() ? "(unknown)"
                                                            : match.benchmark];
    }
}

// Called in input order for lines that produced no document.
using ErrorSink = std::function<void(const IngestError&)>;

void run_scan(JsonlReader& reader, const SubstringPool& pool,
              const ScanConfig& config, unsigned workers, ScanReport& report,
              const VerdictSink& sink, const ErrorSink& error_sink) {
    if (workers < 1) throw ConfigError("scan_corpus: workers must be >= 1");

    auto consume = [&](JsonlReader::Item& item,
                       const ContaminationVerdict* verdict) {
        if (item.error) {
            report.errors.push_back(*item.error);
            report.errors.back().raw_line.clear();  // reports carry no payload
            if (!item.doc && error_sink) error_sink(*item.error);
        }
        if (item.doc && verdict) {
            aggregate(report, *verdict);
            if (sink) sink(*verdict, *item.doc);
        }
    };

    if (workers == 1) {
        while (auto item = reader.next()) {
            if (item->doc) {
                ContaminationVerdict verdict = check_document(
                    item->doc->doc_id, item->doc->text, pool, config);
                consume(*item, &verdict);
            } else {
                consume(*item, nullptr);
            }
        }
        report.bytes_processed = reader.bytes_read();
        return;
    }

    TaskQueue queue(std::max<std::size_t>(64, workers * 16));
    ResultBuffer results;
    std::atomic<uint64_t> total{0};
    std::atomic<bool> total_known{false};
    std::exception_ptr reader_failure;

    std::thread feeder([&] {
        try {
            uint64_t seq = 0;
            while (auto item = reader.next()) {
                queue.push(Task{seq++, std::move(*item)});
            }
            total.store(seq);
        } catch (...) {
            reader_failure = std::current_exception();
            total.store(UINT64_MAX);  // collector stops at missing seq
        }
        total_known.store(true);
        queue.close();
    });

    std::vector<std::thread> pool_threads;
    std::atomic<unsigned> live_workers{workers};
    pool_threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool_threads.emplace_back([&] {
            Task task;
            while (queue.pop(task)) {
                Result result;
                if (task.item.doc) {
                    result.verdict = check_document(task.item.doc->doc_id,
                                                    task.item.doc->text, pool,
                                                    config);
                }
                result.item = std::move(task.item);
                results.put(task.seq, std::move(result));
            }
            if (live_workers.fetch_sub(1) == 1) results.mark_done();
        });
    }

    uint64_t next = 0;
    Result result;
    for (;;) {
        if (total_known.load() && next >= total.load()) break;
        if (!results.take(next, result)) break;
        consume(result.item, result.item.doc ? &result.verdict : nullptr);
        ++next;
    }

    feeder.join();
    for (std::thread& t : pool_threads) t.join();
    if (reader_failure) std::rethrow_exception(reader_failure);
    report.bytes_processed = reader.bytes_read();
}

nlohmann::json verdict_to_json(const ContaminationVerdict& verdict) {
    nlohmann::json matches = nlohmann::json::array();
    for (const MatchSpan& match : verdict.matches) {
        matches.push_back(
            {{"normalized_start", match.normalized_start},
             {"normalized_end", match.normalized_end},
             {"original_start", match.original_start},
             {"original_end", match.original_end},
             {"source",
              match.source == MatchSource::kWindow ? "window" : "short_entry"},
             {"benchmark", match.benchmark},
             {"evidence_before", match.evidence_before},
             {"evidence_text", match.evidence_text},
             {"evidence_after", match.evidence_after}});
    }
    return {{"doc_id", verdict.doc_id},
            {"contaminated", verdict.contaminated},
            {"windows_available", verdict.windows_available},
            {"skipped_too_short", verdict.skipped_too_short},
            {"sampled_positions", verdict.sampled_positions},
            {"windows_tested", verdict.windows_tested},
            {"window_probe_hits", verdict.window_probe_hits},
            {"short_entry_hits", verdict.short_entry_hits},
            {"matches", std::move(matches)}};
}

}  // namespace

ScanReport scan_corpus(JsonlReader& reader, const SubstringPool& pool,
                       const ScanConfig& config, unsigned workers,
                       const VerdictSink& sink) {
    ScanReport report;
    auto start = std::chrono::steady_clock::now();
    run_scan(reader, pool, config, workers, report, sink, nullptr);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    report.contamination_rate =
        report.docs_total == 0
            ? 0.0
            : static_cast<double>(report.docs_contaminated) /
                  static_cast<double>(report.docs_total);
    return report;
}

ScanReport filter_corpus(JsonlReader& reader, const SubstringPool& pool,
                         const ScanConfig& config, unsigned workers,
                         const std::filesystem::path& clean_out,
                         const std::filesystem::path& dirty_out) {
    std::ofstream clean(clean_out, std::ios::binary | std::ios::trunc);
    if (!clean) {
        throw IoError("cannot open output file: " + clean_out.string());
    }
    std::ofstream dirty(dirty_out, std::ios::binary | std::ios::trunc);
    if (!dirty) {
        throw IoError("cannot open output file: " + dirty_out.string());
    }

    auto fail_with_markers = [&](const std::string& what) {
        for (const auto& path : {clean_out, dirty_out}) {
            std::ofstream marker(path.string() + ".partial");
            marker << "incomplete output: " << what << "\n";
        }
        throw IoError("write failure while filtering: " + what);
    };

    ScanReport report;
    auto sink = [&](const ContaminationVerdict& verdict, const CorpusDoc& doc) {
        if (!verdict.contaminated) {
            clean << doc.passthrough << '\n';
        } else {
            nlohmann::ordered_json annotated = nlohmann::ordered_json::parse(
                doc.passthrough, nullptr, /*allow_exceptions=*/false);
            if (annotated.is_discarded() || !annotated.is_object()) {
                annotated =
                    nlohmann::ordered_json{{"raw_line", doc.passthrough}};
            }
            annotated["decontam_verdict"] = verdict_to_json(verdict);
            dirty << annotated.dump() << '\n';
        }
        if (!clean || !dirty) fail_with_markers("stream error");
    };
    // Unparseable lines cannot be certified clean; annotate them into
    // dirty_out so the two outputs always partition the input.
    auto error_sink = [&](const IngestError& error) {
        nlohmann::ordered_json annotated;
        annotated["raw_line"] = error.raw_line;
        annotated["decontam_error"] = error.message;
        // raw_line may hold invalid UTF-8 (that can be why it failed).
        dirty << annotated.dump(-1, ' ', false,
                                nlohmann::json::error_handler_t::replace)
              << '\n';
        if (!dirty) fail_with_markers("stream error");
    };

    auto start = std::chrono::steady_clock::now();
    run_scan(reader, pool, config, workers, report, sink, error_sink);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    report.contamination_rate =
        report.docs_total == 0
            ? 0.0
            : static_cast<double>(report.docs_contaminated) /
                  static_cast<double>(report.docs_total);

    clean.flush();
    dirty.flush();
    if (!clean || !dirty) fail_with_markers("flush error");
    return report;
}

std::string render_report(const ScanReport& report,
                          const std::vector<ContaminationVerdict>& verdicts,
                          ReportFormat format, const RenderOptions& options) {
    if (format == ReportFormat::kJson) {
        nlohmann::json j;
        j["report_version"] = kReportVersion;
        j["docs_total"] = report.docs_total;
        j["docs_contaminated"] = report.docs_contaminated;
        j["docs_clean"] = report.docs_clean;
        j["docs_too_short"] = report.docs_too_short;
        j["windows_sampled_total"] = report.windows_sampled_total;
        j["window_hits_total"] = report.window_hits_total;
        j["short_entry_hits_total"] = report.short_entry_hits_total;
        j["contamination_rate"] = report.contamination_rate;
        j["bytes_processed"] = report.bytes_processed;
        if (options.include_timing) {
            j["wall_time_seconds"] = report.wall_time_seconds;
        }
        nlohmann::json hits = nlohmann::json::object();
        for (const auto& [name, count] : report.per_benchmark_hits) {
            hits[name] = count;
        }
        j["per_benchmark_hits"] = std::move(hits);
        nlohmann::json errors = nlohmann::json::array();
        for (const IngestError& error : report.errors) {
            errors.push_back({{"line", error.line_no}, {"message", error.message}});
        }
        j["errors"] = std::move(errors);
        nlohmann::json docs = nlohmann::json::array();
        for (const ContaminationVerdict& verdict : verdicts) {
            docs.push_back(verdict_to_json(verdict));
        }
        j["contaminated_docs"] = std::move(docs);
        return j.dump(2) + "\n";
    }

    std::ostringstream out;
    out << "corpus scan report\n";
    out << "documents: " << report.docs_total << "\n";
    out << "contaminated: " << report.docs_contaminated << "\n";
    out << "clean: " << report.docs_clean << "\n";
    out << "too short to window: " << report.docs_too_short << "\n";
    out << "windows checked: " << report.windows_sampled_total << "\n";
    out << "window hits: " << report.window_hits_total << "\n";
    out << "short-entry hits: " << report.short_entry_hits_total << "\n";
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.6f", report.contamination_rate);
    out << "contamination rate: " << rate << "\n";
    out << "bytes processed: " << report.bytes_processed << "\n";
    if (options.include_timing) {
        char secs[32];
        std::snprintf(secs, sizeof(secs), "%.3f", report.wall_time_seconds);
        out << "wall time seconds: " << secs << "\n";
    }
    if (!report.per_benchmark_hits.empty()) {
        out << "per-benchmark hits:\n";
        for (const auto& [name, count] : report.per_benchmark_hits) {
            out << "  " << name << ": " << count << "\n";
        }
    }
    if (!report.errors.empty()) {
        out << "errors: " << report.errors.size() << "\n";
        for (const IngestError& error : report.errors) {
            out << "  " << error.message << "\n";
        }
    }
    for (const ContaminationVerdict& verdict : verdicts) {
        if (!verdict.contaminated) continue;
        out << "\ndocument " << verdict.doc_id << "\n";
        for (const MatchSpan& match : verdict.matches) {
            out << "  "
                << (match.source == MatchSource::kWindow ? "window match"
                                                         : "short-entry match");
            if (!match.benchmark.empty()) out << " [" << match.benchmark << "]";
            out << " original span [" << match.original_start << ", "
                << match.original_end << ")\n";
            out << "    ..." << match.evidence_before << "[[" << match.evidence_text
                << "]]" << match.evidence_after << "...\n";
        }
    }
    return out.str();
}

}  // namespace decontam
