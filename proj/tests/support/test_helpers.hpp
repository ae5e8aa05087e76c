// Shared test utilities: fixture loading, deterministic corpus generators,
// and the independent reference implementations (exact-string pool,
// brute-force contamination check) used as oracles against the production
// fingerprint path.
#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decontam/normalize.hpp"
#include "decontam/pool.hpp"
#include "decontam/unicode.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() {
#ifdef DECONTAM_TEST_DATA_DIR
    return std::filesystem::path(DECONTAM_TEST_DATA_DIR);
#else
    return std::filesystem::path("tests/data");
#endif
}

inline std::vector<nlohmann::json> load_jsonl(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("missing fixture file: " + p.string());
    std::vector<nlohmann::json> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) out.push_back(nlohmann::json::parse(line));
    }
    return out;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / ("decontam-" + tag + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const {
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// --- deterministic text generators ---

inline std::string random_ascii_words(std::mt19937_64& rng, std::size_t words) {
    static const char* kWords[] = {
        "alpha", "bravo", "charlie", "delta", "echo",   "foxtrot", "golf",
        "hotel", "india", "juliet",  "kilo",  "lima",   "mike",    "november",
        "oscar", "papa",  "quebec",  "romeo", "sierra", "tango",   "uniform",
        "victor", "whiskey", "xray", "yankee", "zulu",  "ocean",   "river",
        "mountain", "valley", "forest", "desert", "island", "harbor"};
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out += ' ';
        out += kWords[rng() % (sizeof(kWords) / sizeof(kWords[0]))];
        if (rng() % 7 == 0) out += ',';
        if (rng() % 11 == 0) out += std::to_string(rng() % 1000);
    }
    out += '.';
    return out;
}

inline std::string random_letters(std::mt19937_64& rng, std::size_t count) {
    std::string out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(static_cast<char>('a' + rng() % 26));
    }
    return out;
}

inline std::u32string random_normalized_window(std::mt19937_64& rng,
                                               std::size_t length) {
    std::u32string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        if (rng() % 4 == 0) {
            out.push_back(U'0' + rng() % 10);
        } else {
            out.push_back(U'a' + rng() % 26);
        }
    }
    return out;
}

// --- independent reference implementations (oracles) ---

// Exact-string pool: every window stored verbatim in an ordered set. The
// production pool must answer membership identically.
class ExactReferencePool {
public:
    ExactReferencePool(const std::vector<decontam::TestSet>& test_sets,
                       uint32_t window_size)
        : window_size_(window_size) {
        for (const auto& set : test_sets) {
            for (const auto& example : set.examples) {
                decontam::NormalizedText norm = decontam::normalize(example);
                if (norm.text.size() < window_size_) {
                    if (!norm.text.empty()) short_entries_.insert(norm.text);
                    continue;
                }
                for (std::size_t k = 0;
                     k + window_size_ <= norm.text.size(); ++k) {
                    windows_.insert(norm.text.substr(k, window_size_));
                }
            }
        }
    }

    bool contains(std::u32string_view window) const {
        return windows_.count(std::u32string(window)) != 0;
    }

    std::size_t unique_windows() const { return windows_.size(); }
    const std::set<std::u32string>& windows() const { return windows_; }
    const std::set<std::u32string>& short_entries() const {
        return short_entries_;
    }

    // Brute-force contamination decision: any window of the document in the
    // set, or any short entry contained anywhere in the normalized text.
    bool document_contaminated(std::string_view raw) const {
        decontam::NormalizedText norm = decontam::normalize(raw);
        for (std::size_t k = 0; k + window_size_ <= norm.text.size(); ++k) {
            if (contains(std::u32string_view(norm.text).substr(k, window_size_)))
                return true;
        }
        for (const std::u32string& entry : short_entries_) {
            if (norm.text.find(entry) != std::u32string::npos) return true;
        }
        return false;
    }

private:
    uint32_t window_size_;
    std::set<std::u32string> windows_;
    std::set<std::u32string> short_entries_;
};

// --- CLI runner ---

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

inline std::string cli_path() {
#ifdef DECONTAM_CLI_PATH
    return DECONTAM_CLI_PATH;
#else
    return "decontam";
#endif
}

inline CliResult run_cli(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    CliResult result;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), n);
    }
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace testsupport
