// Streaming JSON-Lines ingestion. One record per line; lines that fail to
// parse are surfaced as itemized errors, never silently dropped.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>

namespace decontam {

struct CorpusDoc {
    std::string doc_id;
    std::string text;
    std::string passthrough;  // the original line, byte for byte
    uint64_t line_no = 0;     // 1-based
};

struct IngestError {
    uint64_t line_no = 0;
    std::string message;
    // Original bytes of the offending line when no document could be
    // produced from it; empty for warnings that accompany a document.
    std::string raw_line;
};

class JsonlReader {
public:
    // Throws IoError when the file cannot be opened. When id_field is
    // empty, ids are synthesized as "<filename>:<line>". With an explicit
    // id_field, duplicate ids get a deterministic "#dupN" suffix plus a
    // warning; this keeps a set of seen ids, so corpora with external ids
    // trade a little memory for the uniqueness guarantee.
    JsonlReader(const std::filesystem::path& path, std::string text_field,
                std::string id_field = {});

    struct Item {
        std::optional<CorpusDoc> doc;
        std::optional<IngestError> error;  // may accompany a doc (warnings)
    };

    // Next record, or nullopt at end of file.
    std::optional<Item> next();

    uint64_t bytes_read() const { return bytes_read_; }
    uint64_t lines_read() const { return line_no_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::string filename_;
    std::ifstream stream_;
    std::string text_field_;
    std::string id_field_;
    uint64_t line_no_ = 0;
    uint64_t bytes_read_ = 0;
    std::unordered_set<std::string> seen_ids_;
};

}  // namespace decontam
