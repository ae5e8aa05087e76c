// Aho-Corasick automaton over Unicode scalar values. Built once, then
// read-only; safe to share across scan workers.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace decontam {

class MultiPatternMatcher {
public:
    struct Occurrence {
        uint32_t start;    // inclusive, in scalar values
        uint32_t end;      // exclusive
        uint32_t pattern;  // index of the matched pattern
    };

    // Empty patterns are ignored. Returns the pattern index.
    uint32_t add_pattern(std::u32string_view pattern);

    // Finalizes failure links. Must be called before find_all; adding
    // patterns afterwards is a usage error.
    void build();

    bool built() const { return built_; }
    std::size_t pattern_count() const { return patterns_.size(); }
    const std::u32string& pattern(std::size_t i) const { return patterns_[i]; }

    // Reports every occurrence of every pattern, in increasing end order.
    void find_all(std::u32string_view text,
                  const std::function<void(const Occurrence&)>& on_match) const;

    std::vector<Occurrence> find_all(std::u32string_view text) const;

private:
    struct Node {
        std::map<char32_t, int32_t> next;
        int32_t fail = 0;
        int32_t output_link = -1;      // nearest suffix node with outputs
        std::vector<uint32_t> outputs; // pattern indices ending here
    };

    int32_t step(int32_t state, char32_t c) const;

    std::vector<Node> nodes_{1};
    std::vector<std::u32string> patterns_;
    bool built_ = false;
};

}  // namespace decontam
