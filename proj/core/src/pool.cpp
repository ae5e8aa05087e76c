#include "decontam/pool.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "decontam/errors.hpp"
#include "decontam/unicode.hpp"

namespace decontam {

namespace {

constexpr char kMagic[4] = {'D', 'P', 'L', '1'};
constexpr uint16_t kFormatVersion = 1;

void validate_config(const PoolConfig& config) {
    if (config.window_size < kMinWindowSize) {
        throw ConfigError("window_size must be >= " +
                          std::to_string(kMinWindowSize) + ", got " +
                          std::to_string(config.window_size));
    }
    if (config.window_size > std::numeric_limits<uint16_t>::max()) {
        throw ConfigError("window_size exceeds the pool format limit of 65535");
    }
}

// --- base64 (for the owner-attribution array inside the JSON blob) ---

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<uint16_t>& values) {
    std::string bytes;
    bytes.reserve(values.size() * 2);
    for (uint16_t v : values) {
        bytes.push_back(static_cast<char>(v & 0xFF));
        bytes.push_back(static_cast<char>(v >> 8));
    }
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(kB64Alphabet[(n >> 18) & 63]);
        out.push_back(kB64Alphabet[(n >> 12) & 63]);
        out.push_back(kB64Alphabet[(n >> 6) & 63]);
        out.push_back(kB64Alphabet[n & 63]);
        i += 3;
    }
    std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(n >> 18) & 63]);
        out.push_back(kB64Alphabet[(n >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(n >> 18) & 63]);
        out.push_back(kB64Alphabet[(n >> 12) & 63]);
        out.push_back(kB64Alphabet[(n >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<uint16_t> base64_decode_u16(const std::string& text) {
    int8_t rev[256];
    std::memset(rev, -1, sizeof(rev));
    for (int i = 0; i < 64; ++i) {
        rev[static_cast<unsigned char>(kB64Alphabet[i])] = static_cast<int8_t>(i);
    }
    std::string bytes;
    bytes.reserve(text.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        int8_t v = rev[static_cast<unsigned char>(c)];
        if (v < 0) throw ConfigError("invalid base64 in pool provenance blob");
        acc = (acc << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            bytes.push_back(static_cast<char>((acc >> bits) & 0xFF));
        }
    }
    if (bytes.size() % 2 != 0) {
        throw ConfigError("owner array in pool provenance blob has odd length");
    }
    std::vector<uint16_t> out(bytes.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<uint16_t>(
            static_cast<unsigned char>(bytes[2 * i]) |
            (static_cast<unsigned char>(bytes[2 * i + 1]) << 8));
    }
    return out;
}

// --- little-endian stream I/O ---

class LeWriter {
public:
    explicit LeWriter(std::ostream& os) : os_(os) {}

    void u16(uint16_t v) { bytes(&v, 2); }
    void u32(uint32_t v) { bytes(&v, 4); }
    void u64(uint64_t v) { bytes(&v, 8); }
    void raw(const void* data, std::size_t n) {
        os_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }

private:
    template <typename T>
    void bytes(const T* v, std::size_t n) {
        unsigned char buf[8];
        uint64_t x = *v;
        for (std::size_t i = 0; i < n; ++i) buf[i] = (x >> (8 * i)) & 0xFF;
        os_.write(reinterpret_cast<const char*>(buf),
                  static_cast<std::streamsize>(n));
    }

    std::ostream& os_;
};

class LeReader {
public:
    explicit LeReader(std::istream& is) : is_(is) {}

    std::size_t offset() const { return offset_; }

    uint16_t u16(const char* what) { return static_cast<uint16_t>(uint_n(2, what)); }
    uint32_t u32(const char* what) { return static_cast<uint32_t>(uint_n(4, what)); }
    uint64_t u64(const char* what) { return uint_n(8, what); }

    void raw(void* out, std::size_t n, const char* what) {
        is_.read(static_cast<char*>(out), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n) {
            throw PoolFormatError(std::string("truncated pool file while reading ") +
                                      what,
                                  offset_);
        }
        offset_ += n;
    }

    bool at_eof() {
        return is_.peek() == std::char_traits<char>::eof();
    }

private:
    uint64_t uint_n(std::size_t n, const char* what) {
        unsigned char buf[8];
        raw(buf, n, what);
        uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
        return v;
    }

    std::istream& is_;
    std::size_t offset_ = 0;
};

}  // namespace

void for_each_window(
    std::u32string_view text, uint32_t window_size,
    const std::function<void(uint32_t, std::u32string_view)>& fn) {
    if (text.size() < window_size) return;
    uint32_t count = static_cast<uint32_t>(text.size() - window_size + 1);
    for (uint32_t start = 0; start < count; ++start) {
        fn(start, text.substr(start, window_size));
    }
}

bool SubstringPool::contains(const Fingerprint& fp) const {
    return std::binary_search(fingerprints_.begin(), fingerprints_.end(), fp);
}

bool SubstringPool::contains(std::u32string_view window) const {
    if (window.size() != config_.window_size) {
        throw std::invalid_argument(
            "pool_contains: window length " + std::to_string(window.size()) +
            " != configured window size " + std::to_string(config_.window_size));
    }
    return contains(fingerprint_window(window, config_.fingerprint_seed));
}

int32_t SubstringPool::owner_of(const Fingerprint& fp) const {
    auto it = std::lower_bound(fingerprints_.begin(), fingerprints_.end(), fp);
    if (it == fingerprints_.end() || *it != fp) return -1;
    std::size_t idx = static_cast<std::size_t>(it - fingerprints_.begin());
    return idx < owners_.size() ? owners_[idx] : -1;
}

bool SubstringPool::exact_contains(std::u32string_view window) const {
    return std::binary_search(exact_windows_.begin(), exact_windows_.end(),
                              window);
}

void SubstringPool::finalize() {
    // Sort (fingerprint, owner) pairs together, then keep the first
    // contributor of each unique fingerprint.
    std::vector<std::size_t> order(fingerprints_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (fingerprints_[a] != fingerprints_[b])
            return fingerprints_[a] < fingerprints_[b];
        return owners_[a] < owners_[b];
    });
    std::vector<Fingerprint> fps;
    std::vector<uint16_t> owners;
    fps.reserve(order.size());
    owners.reserve(order.size());
    for (std::size_t i : order) {
        if (!fps.empty() && fps.back() == fingerprints_[i]) continue;
        fps.push_back(fingerprints_[i]);
        owners.push_back(owners_[i]);
    }
    fingerprints_ = std::move(fps);
    owners_ = std::move(owners);

    std::sort(short_entries_.begin(), short_entries_.end(),
              [](const ShortEntry& a, const ShortEntry& b) {
                  if (a.text != b.text) return a.text < b.text;
                  return a.owner < b.owner;
              });
    short_entries_.erase(
        std::unique(short_entries_.begin(), short_entries_.end(),
                    [](const ShortEntry& a, const ShortEntry& b) {
                        return a.text == b.text;
                    }),
        short_entries_.end());

    std::sort(exact_windows_.begin(), exact_windows_.end());
    exact_windows_.erase(
        std::unique(exact_windows_.begin(), exact_windows_.end()),
        exact_windows_.end());

    matcher_ = MultiPatternMatcher();
    for (const ShortEntry& entry : short_entries_) {
        matcher_.add_pattern(entry.text);
    }
    matcher_.build();
}

SubstringPool build_pool(const std::vector<TestSet>& test_sets,
                         const PoolConfig& config) {
    validate_config(config);
    if (test_sets.empty()) {
        throw ConfigError("build_pool: at least one test set is required");
    }
    if (test_sets.size() > std::numeric_limits<uint16_t>::max()) {
        throw ConfigError("build_pool: too many test sets");
    }

    SubstringPool pool;
    pool.config_ = config;
    const uint32_t S = config.window_size;

    for (std::size_t b = 0; b < test_sets.size(); ++b) {
        const TestSet& set = test_sets[b];
        BenchmarkProvenance prov{set.name, 0, 0};
        uint16_t owner = static_cast<uint16_t>(b);
        for (const std::string& example : set.examples) {
            ++prov.example_count;
            NormalizedText norm = normalize(example);
            if (norm.text.size() < S) {
                if (!norm.text.empty()) {
                    pool.short_entries_.push_back({norm.text, owner});
                }
                continue;
            }
            for_each_window(norm.text, S,
                            [&](uint32_t, std::u32string_view window) {
                                pool.fingerprints_.push_back(fingerprint_window(
                                    window, config.fingerprint_seed));
                                pool.owners_.push_back(owner);
                                if (config.keep_exact_windows) {
                                    pool.exact_windows_.emplace_back(window);
                                }
                                ++prov.window_count;
                            });
        }
        pool.total_windows_seen_ += prov.window_count;
        pool.provenance_.push_back(std::move(prov));
    }

    pool.finalize();
    return pool;
}

SubstringPool merge_pools(const SubstringPool& a, const SubstringPool& b) {
    if (!(a.config_ == b.config_)) {
        throw ConfigError("merge_pools: pool configs differ");
    }
    if (a.provenance_.size() + b.provenance_.size() >
        std::numeric_limits<uint16_t>::max()) {
        throw ConfigError("merge_pools: too many combined test sets");
    }

    SubstringPool out;
    out.config_ = a.config_;
    out.config_.keep_exact_windows =
        a.config_.keep_exact_windows || b.config_.keep_exact_windows;
    out.provenance_ = a.provenance_;
    out.provenance_.insert(out.provenance_.end(), b.provenance_.begin(),
                           b.provenance_.end());
    out.total_windows_seen_ = a.total_windows_seen_ + b.total_windows_seen_;

    const uint16_t shift = static_cast<uint16_t>(a.provenance_.size());

    out.fingerprints_ = a.fingerprints_;
    out.owners_ = a.owners_;
    out.fingerprints_.insert(out.fingerprints_.end(), b.fingerprints_.begin(),
                             b.fingerprints_.end());
    for (uint16_t owner : b.owners_) {
        out.owners_.push_back(static_cast<uint16_t>(owner + shift));
    }

    out.short_entries_ = a.short_entries_;
    for (ShortEntry entry : b.short_entries_) {
        entry.owner = static_cast<uint16_t>(entry.owner + shift);
        out.short_entries_.push_back(std::move(entry));
    }

    out.exact_windows_ = a.exact_windows_;
    out.exact_windows_.insert(out.exact_windows_.end(),
                              b.exact_windows_.begin(), b.exact_windows_.end());

    out.finalize();
    return out;
}

void save_pool(const SubstringPool& pool, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot open pool file for writing: " + path.string());
    }
    LeWriter w(os);
    w.raw(kMagic, 4);
    w.u16(kFormatVersion);
    w.u16(static_cast<uint16_t>(pool.config().window_size));
    w.u64(pool.config().fingerprint_seed);
    w.u64(pool.fingerprints().size());
    for (const Fingerprint& fp : pool.fingerprints()) {
        w.u64(fp.lo);
        w.u64(fp.hi);
    }
    w.u32(static_cast<uint32_t>(pool.short_entries().size()));
    for (const ShortEntry& entry : pool.short_entries()) {
        std::string utf8 = uni::encode_utf8(entry.text);
        w.u16(static_cast<uint16_t>(utf8.size()));
        w.raw(utf8.data(), utf8.size());
    }

    nlohmann::json blob;
    nlohmann::json benchmarks = nlohmann::json::array();
    for (const BenchmarkProvenance& prov : pool.provenance()) {
        benchmarks.push_back({{"name", prov.name},
                              {"examples", prov.example_count},
                              {"windows", prov.window_count}});
    }
    blob["benchmarks"] = std::move(benchmarks);
    blob["total_windows_seen"] = pool.total_windows_seen();
    blob["fingerprint_owners"] = base64_encode(pool.owners_);
    nlohmann::json short_owners = nlohmann::json::array();
    for (const ShortEntry& entry : pool.short_entries()) {
        short_owners.push_back(entry.owner);
    }
    blob["short_entry_owners"] = std::move(short_owners);

    std::string blob_text = blob.dump();
    w.u32(static_cast<uint32_t>(blob_text.size()));
    w.raw(blob_text.data(), blob_text.size());
    os.flush();
    if (!os) {
        throw IoError("write failure on pool file: " + path.string());
    }
}

SubstringPool load_pool(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open pool file: " + path.string());
    }
    LeReader r(is);

    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw PoolFormatError("bad magic, not a pool file", 0);
    }
    uint16_t version = r.u16("format version");
    if (version != kFormatVersion) {
        throw PoolFormatError(
            "unsupported pool format version " + std::to_string(version), 4);
    }

    SubstringPool pool;
    pool.config_.window_size = r.u16("window size");
    pool.config_.fingerprint_seed = r.u64("fingerprint seed");
    if (pool.config_.window_size < kMinWindowSize) {
        throw PoolFormatError("window size below minimum", 6);
    }

    uint64_t count = r.u64("fingerprint count");
    pool.fingerprints_.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        std::size_t at = r.offset();
        Fingerprint fp;
        fp.lo = r.u64("fingerprint");
        fp.hi = r.u64("fingerprint");
        if (!pool.fingerprints_.empty() && !(pool.fingerprints_.back() < fp)) {
            throw PoolFormatError("fingerprints not strictly ascending", at);
        }
        pool.fingerprints_.push_back(fp);
    }

    uint32_t short_count = r.u32("short-entry count");
    pool.short_entries_.reserve(short_count);
    for (uint32_t i = 0; i < short_count; ++i) {
        std::size_t at = r.offset();
        uint16_t len = r.u16("short-entry length");
        std::string utf8(len, '\0');
        r.raw(utf8.data(), len, "short entry");
        bool valid = true;
        std::u32string text = uni::decode_utf8(utf8, &valid);
        if (!valid || text.empty() || text.size() >= pool.config_.window_size) {
            throw PoolFormatError("invalid short entry", at);
        }
        pool.short_entries_.push_back({std::move(text), 0});
    }

    std::size_t blob_at = r.offset();
    uint32_t blob_len = r.u32("provenance length");
    std::string blob_text(blob_len, '\0');
    r.raw(blob_text.data(), blob_len, "provenance blob");
    if (!r.at_eof()) {
        throw PoolFormatError("trailing bytes after provenance blob",
                              r.offset());
    }

    nlohmann::json blob = nlohmann::json::parse(blob_text, nullptr,
                                                /*allow_exceptions=*/false);
    if (blob.is_discarded() || !blob.is_object()) {
        throw PoolFormatError("provenance blob is not valid JSON", blob_at);
    }
    try {
        for (const auto& item : blob.at("benchmarks")) {
            pool.provenance_.push_back({item.at("name").get<std::string>(),
                                        item.at("examples").get<uint64_t>(),
                                        item.at("windows").get<uint64_t>()});
        }
        pool.total_windows_seen_ = blob.at("total_windows_seen").get<uint64_t>();
        pool.owners_ =
            base64_decode_u16(blob.at("fingerprint_owners").get<std::string>());
        const auto& short_owners = blob.at("short_entry_owners");
        for (std::size_t i = 0;
             i < pool.short_entries_.size() && i < short_owners.size(); ++i) {
            pool.short_entries_[i].owner = short_owners[i].get<uint16_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw PoolFormatError(std::string("provenance blob: ") + e.what(),
                              blob_at);
    }
    if (pool.owners_.size() != pool.fingerprints_.size()) {
        throw PoolFormatError("owner array does not match fingerprint count",
                              blob_at);
    }

    pool.matcher_ = MultiPatternMatcher();
    for (const ShortEntry& entry : pool.short_entries_) {
        pool.matcher_.add_pattern(entry.text);
    }
    pool.matcher_.build();
    return pool;
}

}  // namespace decontam
