// Needle-in-a-haystack long-context test synthesis: embed a target sentence
// at controlled depths inside distractor text across a grid of context
// lengths, and emit the instances as JSON-Lines.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decontam {

struct NiahText {
    std::string needle;
    std::string query;
    std::string instruction;
};

// Shipped defaults for "en" and "ko"; throws ConfigError for other codes.
const NiahText& default_niah_text(std::string_view language);

std::vector<uint64_t> default_niah_lengths();  // 8 values, ascending
std::vector<double> default_niah_depths();     // 0..100 step 10

struct NiahSpec {
    std::string language = "en";
    NiahText text;  // leave needle empty to use the language defaults
    std::filesystem::path haystack_source;  // directory of .txt or a .jsonl
    std::string haystack_text_field = "text";
    std::vector<uint64_t> lengths;  // strictly increasing
    std::vector<double> depths;     // percentages in [0, 100]
    // "chars" counts Unicode scalar values. "command" pipes text to an
    // external counter (stdin -> integer on stdout), so any tokenizer can
    // be plugged in; as a rule of thumb 1 token is roughly 4 characters
    // of English text when sizing a character grid against a token budget.
    std::string length_unit = "chars";
    std::string counter_command;
    double depth_tolerance_pct = 2.0;
    uint64_t seed = 0;
};

struct NiahInstance {
    std::string context;
    std::string needle;
    std::string query;
    std::string instruction;
    std::string language;
    std::string gold_answer;  // the needle, for ground-truth matching
    uint64_t target_length = 0;
    uint64_t actual_length = 0;
    double target_depth_pct = 0.0;
    double actual_depth_pct = 0.0;
    // True when no sentence/paragraph boundary was close enough and the
    // needle was spliced at the exact character position instead.
    bool boundary_fallback = false;
};

class InsufficientCorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NeedleCollisionError : public std::runtime_error {
public:
    NeedleCollisionError(const std::string& document)
        : std::runtime_error("needle already occurs in source document: " +
                             document),
          document_(document) {}
    const std::string& document() const { return document_; }

private:
    std::string document_;
};

// Length measurement in the configured unit.
class LengthCounter {
public:
    LengthCounter(std::string unit, std::string command);
    uint64_t measure(std::string_view text) const;
    const std::string& unit() const { return unit_; }

private:
    std::string unit_;
    std::string command_;
};

struct HaystackCorpus {
    struct Doc {
        std::string name;
        std::vector<std::string> paragraphs;
    };
    std::vector<Doc> docs;

    // Directory: every *.txt file, sorted by name. File: JSON-Lines with
    // `text_field`. Throws IoError on unreadable input or invalid UTF-8.
    static HaystackCorpus load(const std::filesystem::path& source,
                               const std::string& text_field = "text");
};

// Concatenates paragraphs (starting at doc `rotation`, one pass, no reuse)
// until the result is within 5% of target_length, trimming at a paragraph
// boundary where possible, then sentence boundary, then exact cut. Verifies
// the needle does not occur in any consumed document.
std::string assemble_haystack(const HaystackCorpus& corpus,
                              uint64_t target_length,
                              const LengthCounter& counter,
                              const std::string& needle,
                              std::size_t rotation = 0);

struct EmbedResult {
    std::string context;
    uint64_t needle_start_units = 0;
    uint64_t context_units = 0;
    uint64_t needle_units = 0;
    double actual_depth_pct = 0.0;
    bool boundary_fallback = false;
};

// Inserts the needle at the sentence/paragraph boundary nearest to
// depth_pct of the haystack; exact position fallback when no boundary is
// within the tolerance window. Guarantees the needle occurs exactly once.
EmbedResult embed_needle(const std::string& haystack,
                         const std::string& needle, double depth_pct,
                         const LengthCounter& counter,
                         double depth_tolerance_pct);

struct CellFailure {
    uint64_t target_length = 0;
    double target_depth_pct = 0.0;
    std::string message;
};

struct GridResult {
    uint64_t written = 0;
    std::vector<CellFailure> failures;
};

// Writes |lengths| x |depths| instances to out_path as JSON-Lines in
// (length, depth) order. Failed cells are reported and skipped; the rest of
// the grid still generates. Reruns with the same spec and seed are
// byte-identical.
GridResult generate_grid(const NiahSpec& spec,
                         const std::filesystem::path& out_path);

}  // namespace decontam
