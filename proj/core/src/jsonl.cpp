#include "decontam/jsonl.hpp"

#include <json.hpp>

#include "decontam/errors.hpp"

namespace decontam {

JsonlReader::JsonlReader(const std::filesystem::path& path,
                         std::string text_field, std::string id_field)
    : path_(path),
      filename_(path.filename().string()),
      stream_(path, std::ios::binary),
      text_field_(std::move(text_field)),
      id_field_(std::move(id_field)) {
    if (!stream_) {
        throw IoError("cannot open corpus file: " + path.string());
    }
}

std::optional<JsonlReader::Item> JsonlReader::next() {
    std::string line;
    if (!std::getline(stream_, line)) {
        if (stream_.bad()) {
            throw IoError("read failure on corpus file: " + path_.string());
        }
        return std::nullopt;
    }
    ++line_no_;
    bytes_read_ += line.size() + 1;

    Item item;
    nlohmann::json record =
        nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
        // nlohmann rejects both malformed JSON and invalid UTF-8 here.
        item.error = IngestError{line_no_,
                                 "line " + std::to_string(line_no_) +
                                     ": invalid JSON or invalid UTF-8",
                                 std::move(line)};
        return item;
    }
    if (!record.is_object()) {
        item.error = IngestError{line_no_,
                                 "line " + std::to_string(line_no_) +
                                     ": record is not a JSON object",
                                 std::move(line)};
        return item;
    }
    auto text_it = record.find(text_field_);
    if (text_it == record.end()) {
        item.error = IngestError{line_no_,
                                 "line " + std::to_string(line_no_) +
                                     ": missing field '" + text_field_ + "'",
                                 std::move(line)};
        return item;
    }
    if (!text_it->is_string()) {
        item.error = IngestError{line_no_,
                                 "line " + std::to_string(line_no_) +
                                     ": field '" + text_field_ +
                                     "' is not a string",
                                 std::move(line)};
        return item;
    }

    CorpusDoc doc;
    doc.text = text_it->get<std::string>();
    doc.passthrough = std::move(line);
    doc.line_no = line_no_;

    if (id_field_.empty()) {
        doc.doc_id = filename_ + ":" + std::to_string(line_no_);
    } else {
        auto id_it = record.find(id_field_);
        if (id_it == record.end()) {
            item.error = IngestError{line_no_,
                                     "line " + std::to_string(line_no_) +
                                         ": missing field '" + id_field_ + "'",
                                     std::move(doc.passthrough)};
            return item;
        }
        doc.doc_id = id_it->is_string() ? id_it->get<std::string>()
                                        : id_it->dump();
        if (doc.doc_id.empty()) {
            doc.doc_id = filename_ + ":" + std::to_string(line_no_);
            item.error = IngestError{
                line_no_, "line " + std::to_string(line_no_) +
                              ": empty doc id, synthesized " + doc.doc_id};
        }
        // Deduplicate externally supplied ids.
        std::string base = doc.doc_id;
        int suffix = 1;
        while (!seen_ids_.insert(doc.doc_id).second) {
            doc.doc_id = base + "#dup" + std::to_string(suffix++);
        }
        if (suffix > 1) {
            item.error = IngestError{
                line_no_, "line " + std::to_string(line_no_) +
                              ": duplicate doc id '" + base + "', renamed to '" +
                              doc.doc_id + "'"};
        }
    }

    item.doc = std::move(doc);
    return item;
}

}  // namespace decontam
