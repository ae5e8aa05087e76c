#include "decontam/niah.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "decontam/errors.hpp"
#include "decontam/unicode.hpp"

namespace decontam {

namespace {

const NiahText kEnglishDefaults{
    "The best thing to do in San Francisco is eat a sandwich and sit in "
    "Dolores Park on a sunny day.",
    "What is the best thing to do in San Francisco?",
    "Analyze the content of the given document to locate the answer to the "
    "specified question. If found, provide the exact wording from the "
    "document without altering or summarizing it."};

const NiahText kKoreanDefaults{
    "광화문에서 가장 재미있는 일은 햇살 좋은 날에 샌드위치를 먹으며 청와대 "
    "안에 있는 공원에 앉아 있는 것입니다.",
    "광화문에서 가장 재미있는 일이 무엇인가요?",
    "주어진 문서를 읽고 질문에 대한 답을 확인하세요. 답을 찾으면, 문서의 "
    "원문을 그대로 유지하여 수정이나 해석 없이 반환하세요."};

bool is_sentence_end(char32_t c) {
    return c == U'.' || c == U'!' || c == U'?' || c == U'。' ||
           c == U'！' || c == U'？' || c == U'…';
}

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' ||
           c == U' ' || c == U'　';
}

// A boundary is a position where a new sentence or paragraph may start.
bool is_boundary(const std::u32string& text, uint64_t pos) {
    if (pos == 0 || pos >= text.size()) return true;
    if (is_space(text[pos])) return false;  // land on content, not blanks
    if (text[pos - 1] == U'\n') return true;
    // After sentence-ending punctuation plus at least one space.
    uint64_t p = pos;
    while (p > 0 && is_space(text[p - 1])) --p;
    if (p == pos || p == 0) return false;
    return is_sentence_end(text[p - 1]);
}

uint64_t count_occurrences(const std::string& text, const std::string& sub) {
    if (sub.empty()) return 0;
    uint64_t count = 0;
    std::size_t at = 0;
    while ((at = text.find(sub, at)) != std::string::npos) {
        ++count;
        at += 1;  // overlapping occurrences count too
    }
    return count;
}

std::vector<std::string> split_paragraphs(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::size_t s = start;
        while (s < end && (text[s] == '\n' || text[s] == '\r')) ++s;
        std::size_t e = end;
        while (e > s && (text[e - 1] == '\n' || text[e - 1] == '\r' ||
                         text[e - 1] == ' ' || text[e - 1] == '\t')) {
            --e;
        }
        if (e > s) out.push_back(text.substr(s, e - s));
    };
    std::size_t at = 0;
    while ((at = text.find("\n\n", start)) != std::string::npos) {
        flush(at);
        start = at + 2;
    }
    flush(text.size());
    return out;
}

// First sentence-boundary cut of `paragraph` that keeps the result at or
// under max_units; empty when even the first sentence is too long.
std::string cut_at_sentence(const std::string& paragraph, uint64_t max_units,
                            const LengthCounter& counter) {
    std::u32string scalars = uni::decode_utf8(paragraph);
    std::string best;
    for (uint64_t i = 1; i < scalars.size(); ++i) {
        if (!is_boundary(scalars, i)) continue;
        std::string prefix = uni::encode_utf8(
            std::u32string_view(scalars).substr(0, i));
        while (!prefix.empty() &&
               (prefix.back() == ' ' || prefix.back() == '\n')) {
            prefix.pop_back();
        }
        if (counter.measure(prefix) > max_units) break;
        best = std::move(prefix);
    }
    return best;
}

}  // namespace

const NiahText& default_niah_text(std::string_view language) {
    if (language == "en") return kEnglishDefaults;
    if (language == "ko") return kKoreanDefaults;
    throw ConfigError("no built-in needle configuration for language '" +
                      std::string(language) + "' (expected en or ko)");
}

std::vector<uint64_t> default_niah_lengths() {
    return {1000, 2000, 4000, 8000, 12000, 16000, 24000, 32000};
}

std::vector<double> default_niah_depths() {
    return {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
}

LengthCounter::LengthCounter(std::string unit, std::string command)
    : unit_(std::move(unit)), command_(std::move(command)) {
    if (unit_ != "chars" && unit_ != "command") {
        throw ConfigError("unknown length unit '" + unit_ +
                          "' (expected chars or command)");
    }
    if (unit_ == "command" && command_.empty()) {
        throw ConfigError("length unit 'command' requires a counter command");
    }
}

uint64_t LengthCounter::measure(std::string_view text) const {
    if (unit_ == "chars") {
        // Unicode scalar values; ASCII shortcut for the common case.
        uint64_t count = 0;
        for (unsigned char byte : text) {
            count += (byte & 0xC0) != 0x80;  // skip UTF-8 continuation bytes
        }
        return count;
    }

    // External counter: text on stdin, integer on stdout.
    char tmpl[] = "/tmp/decontam-niah-XXXXXX";
    int fd = mkstemp(tmpl);
    if (fd < 0) throw IoError("cannot create temp file for counter command");
    {
        FILE* f = fdopen(fd, "wb");
        if (!f) throw IoError("cannot open temp file for counter command");
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }
    std::string cmd = command_ + " < " + tmpl;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        std::remove(tmpl);
        throw IoError("cannot run counter command: " + command_);
    }
    char buf[64] = {0};
    std::string output;
    while (std::fgets(buf, sizeof(buf), pipe)) output += buf;
    int status = pclose(pipe);
    std::remove(tmpl);
    if (status != 0) {
        throw IoError("counter command failed with status " +
                      std::to_string(status));
    }
    try {
        return std::stoull(output);
    } catch (const std::exception&) {
        throw IoError("counter command printed no parseable count: '" + output +
                      "'");
    }
}

HaystackCorpus HaystackCorpus::load(const std::filesystem::path& source,
                                    const std::string& text_field) {
    namespace fs = std::filesystem;
    HaystackCorpus corpus;

    auto add_doc = [&](std::string name, std::string content) {
        if (!uni::validate_utf8(content)) {
            throw IoError("invalid UTF-8 in haystack document: " + name);
        }
        Doc doc{std::move(name), split_paragraphs(content)};
        if (!doc.paragraphs.empty()) corpus.docs.push_back(std::move(doc));
    };

    if (fs::is_directory(source)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(source)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& file : files) {
            std::ifstream is(file, std::ios::binary);
            if (!is) throw IoError("cannot read haystack file: " + file.string());
            std::ostringstream ss;
            ss << is.rdbuf();
            add_doc(file.filename().string(), ss.str());
        }
    } else if (fs::is_regular_file(source)) {
        std::ifstream is(source, std::ios::binary);
        if (!is) throw IoError("cannot read haystack file: " + source.string());
        std::string line;
        uint64_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            nlohmann::json record =
                nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (record.is_discarded() || !record.is_object() ||
                !record.contains(text_field) ||
                !record[text_field].is_string()) {
                throw IoError("haystack jsonl line " + std::to_string(line_no) +
                              ": no string field '" + text_field + "'");
            }
            add_doc(source.filename().string() + ":" + std::to_string(line_no),
                    record[text_field].get<std::string>());
        }
    } else {
        throw IoError("haystack source does not exist: " + source.string());
    }

    if (corpus.docs.empty()) {
        throw InsufficientCorpusError("haystack source has no usable text: " +
                                      source.string());
    }
    return corpus;
}

std::string assemble_haystack(const HaystackCorpus& corpus,
                              uint64_t target_length,
                              const LengthCounter& counter,
                              const std::string& needle,
                              std::size_t rotation) {
    if (corpus.docs.empty()) {
        throw InsufficientCorpusError("empty haystack corpus");
    }
    const uint64_t lower = target_length - target_length / 20;  // -5%
    const uint64_t upper = target_length + target_length / 20;  // +5%

    std::string out;
    uint64_t units = 0;
    const uint64_t sep_units = counter.measure("\n\n");

    auto try_append = [&](const std::string& piece) {
        uint64_t piece_units = counter.measure(piece);
        uint64_t next = units + piece_units + (out.empty() ? 0 : sep_units);
        if (next > upper) return false;
        if (!out.empty()) out += "\n\n";
        out += piece;
        units = next;
        return true;
    };

    const std::size_t n = corpus.docs.size();
    for (std::size_t d = 0; d < n && units < lower; ++d) {
        const HaystackCorpus::Doc& doc = corpus.docs[(rotation + d) % n];
        std::string joined;
        for (const std::string& p : doc.paragraphs) {
            if (!joined.empty()) joined += "\n\n";
            joined += p;
        }
        if (count_occurrences(joined, needle) > 0) {
            throw NeedleCollisionError(doc.name);
        }
        for (const std::string& paragraph : doc.paragraphs) {
            if (units >= lower) break;
            if (try_append(paragraph)) continue;
            // Paragraph overshoots: trim it at a sentence boundary.
            uint64_t room = upper - units - (out.empty() ? 0 : sep_units);
            std::string cut = cut_at_sentence(paragraph, room, counter);
            if (!cut.empty() && try_append(cut) && units >= lower) break;
            if (units >= lower) break;
            // Last resort: exact cut so the tolerance always holds. Only
            // reachable with pathological single-sentence paragraphs.
            std::u32string scalars = uni::decode_utf8(paragraph);
            uint64_t want = target_length - units - (out.empty() ? 0 : sep_units);
            if (counter.unit() == "chars" && want > 0 && want <= scalars.size()) {
                std::string exact = uni::encode_utf8(
                    std::u32string_view(scalars).substr(0, want));
                try_append(exact);
            }
            if (units >= lower) break;
        }
    }

    if (units < lower) {
        throw InsufficientCorpusError(
            "haystack corpus exhausted at " + std::to_string(units) + " of " +
            std::to_string(target_length) + " target units");
    }
    return out;
}

EmbedResult embed_needle(const std::string& haystack,
                         const std::string& needle, double depth_pct,
                         const LengthCounter& counter,
                         double depth_tolerance_pct) {
    if (depth_pct < 0.0 || depth_pct > 100.0) {
        throw ConfigError("depth_pct must be within [0, 100]");
    }
    if (needle.empty()) throw ConfigError("needle must be non-empty");

    std::u32string scalars = uni::decode_utf8(haystack);
    const uint64_t len = scalars.size();
    const uint64_t target =
        static_cast<uint64_t>(depth_pct / 100.0 * static_cast<double>(len) + 0.5);
    const uint64_t window = std::max<uint64_t>(
        1, static_cast<uint64_t>(depth_tolerance_pct / 100.0 *
                                 static_cast<double>(len)));

    // Nearest boundary to the target, scanning outward.
    uint64_t insert_at = target;
    bool fallback = true;
    for (uint64_t delta = 0; delta <= window; ++delta) {
        if (target + delta <= len && is_boundary(scalars, target + delta)) {
            insert_at = target + delta;
            fallback = false;
            break;
        }
        if (delta != 0 && target >= delta &&
            is_boundary(scalars, target - delta)) {
            insert_at = target - delta;
            fallback = false;
            break;
        }
    }

    std::string pre =
        uni::encode_utf8(std::u32string_view(scalars).substr(0, insert_at));
    std::string post =
        uni::encode_utf8(std::u32string_view(scalars).substr(insert_at));

    std::string pre_sep =
        (!pre.empty() && !std::isspace(static_cast<unsigned char>(pre.back())))
            ? " "
            : "";
    std::string post_sep =
        (!post.empty() &&
         !std::isspace(static_cast<unsigned char>(post.front())))
            ? " "
            : "";

    EmbedResult result;
    result.context = pre + pre_sep + needle + post_sep + post;
    result.boundary_fallback = fallback;
    result.needle_units = counter.measure(needle);
    result.context_units = counter.measure(result.context);
    result.needle_start_units = counter.measure(pre + pre_sep);

    uint64_t denominator = result.context_units > result.needle_units
                               ? result.context_units - result.needle_units
                               : 0;
    result.actual_depth_pct =
        denominator == 0 ? 0.0
                         : 100.0 * static_cast<double>(result.needle_start_units) /
                               static_cast<double>(denominator);

    if (count_occurrences(result.context, needle) != 1) {
        throw ConfigError("needle does not occur exactly once after insertion");
    }
    return result;
}

GridResult generate_grid(const NiahSpec& spec,
                         const std::filesystem::path& out_path) {
    NiahSpec cfg = spec;
    if (cfg.text.needle.empty()) cfg.text = default_niah_text(cfg.language);
    if (cfg.lengths.empty()) cfg.lengths = default_niah_lengths();
    if (cfg.depths.empty()) cfg.depths = default_niah_depths();

    if (cfg.text.needle.empty()) throw ConfigError("needle must be non-empty");
    for (double depth : cfg.depths) {
        if (depth < 0.0 || depth > 100.0) {
            throw ConfigError("depths must be within [0, 100]");
        }
    }
    for (std::size_t i = 1; i < cfg.lengths.size(); ++i) {
        if (cfg.lengths[i] <= cfg.lengths[i - 1]) {
            throw ConfigError("lengths must be strictly increasing");
        }
    }

    LengthCounter counter(cfg.length_unit, cfg.counter_command);
    HaystackCorpus corpus =
        HaystackCorpus::load(cfg.haystack_source, cfg.haystack_text_field);

    std::mt19937_64 rng(cfg.seed);
    std::size_t rotation =
        static_cast<std::size_t>(rng() % corpus.docs.size());

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + out_path.string());

    const uint64_t needle_units = counter.measure(cfg.text.needle);
    GridResult result;

    for (uint64_t length : cfg.lengths) {
        std::string haystack;
        std::string assembly_error;
        if (length < needle_units * 3) {
            assembly_error = "target length " + std::to_string(length) +
                             " is under 3x the needle length";
        } else {
            try {
                uint64_t hay_target = length > needle_units + 1
                                          ? length - needle_units - 1
                                          : length;
                haystack = assemble_haystack(corpus, hay_target, counter,
                                             cfg.text.needle, rotation);
            } catch (const std::exception& e) {
                assembly_error = e.what();
            }
        }

        for (double depth : cfg.depths) {
            if (!assembly_error.empty()) {
                result.failures.push_back({length, depth, assembly_error});
                continue;
            }
            try {
                EmbedResult embedded =
                    embed_needle(haystack, cfg.text.needle, depth, counter,
                                 cfg.depth_tolerance_pct);

                NiahInstance instance;
                instance.context = std::move(embedded.context);
                instance.needle = cfg.text.needle;
                instance.query = cfg.text.query;
                instance.instruction = cfg.text.instruction;
                instance.language = cfg.language;
                instance.gold_answer = cfg.text.needle;
                instance.target_length = length;
                instance.actual_length = embedded.context_units;
                instance.target_depth_pct = depth;
                instance.actual_depth_pct = embedded.actual_depth_pct;
                instance.boundary_fallback = embedded.boundary_fallback;

                // Enforce the instance contract before writing.
                double depth_err =
                    std::abs(instance.actual_depth_pct - instance.target_depth_pct);
                double max_err =
                    instance.boundary_fallback ? 5.0 : cfg.depth_tolerance_pct;
                if (depth_err > max_err) {
                    throw ConfigError("depth error " + std::to_string(depth_err) +
                                      " exceeds tolerance");
                }
                double len_err = std::abs(static_cast<double>(instance.actual_length) -
                                          static_cast<double>(length));
                if (len_err > 0.05 * static_cast<double>(length)) {
                    throw ConfigError("length error " + std::to_string(len_err) +
                                      " exceeds 5% of target");
                }

                nlohmann::ordered_json record;
                record["language"] = instance.language;
                record["target_length"] = instance.target_length;
                record["actual_length"] = instance.actual_length;
                record["target_depth_pct"] = instance.target_depth_pct;
                record["actual_depth_pct"] = instance.actual_depth_pct;
                record["boundary_fallback"] = instance.boundary_fallback;
                record["needle"] = instance.needle;
                record["query"] = instance.query;
                record["instruction"] = instance.instruction;
                record["gold_answer"] = instance.gold_answer;
                record["context"] = instance.context;
                out << record.dump() << '\n';
                ++result.written;
            } catch (const std::exception& e) {
                result.failures.push_back({length, depth, e.what()});
            }
        }
    }

    out.flush();
    if (!out) throw IoError("write failure on " + out_path.string());
    return result;
}

}  // namespace decontam
