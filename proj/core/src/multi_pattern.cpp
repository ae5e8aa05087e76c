#include "decontam/multi_pattern.hpp"

#include <cassert>
#include <deque>
#include <stdexcept>

namespace decontam {

uint32_t MultiPatternMatcher::add_pattern(std::u32string_view pattern) {
    if (built_) {
        throw std::logic_error("MultiPatternMatcher: add_pattern after build");
    }
    uint32_t index = static_cast<uint32_t>(patterns_.size());
    patterns_.emplace_back(pattern);
    if (pattern.empty()) return index;

    int32_t state = 0;
    for (char32_t c : pattern) {
        auto it = nodes_[state].next.find(c);
        if (it == nodes_[state].next.end()) {
            nodes_.push_back(Node{});
            int32_t fresh = static_cast<int32_t>(nodes_.size()) - 1;
            nodes_[state].next.emplace(c, fresh);
            state = fresh;
        } else {
            state = it->second;
        }
    }
    nodes_[state].outputs.push_back(index);
    return index;
}

void MultiPatternMatcher::build() {
    std::deque<int32_t> queue;
    for (auto& [c, child] : nodes_[0].next) {
        nodes_[child].fail = 0;
        queue.push_back(child);
    }
    while (!queue.empty()) {
        int32_t state = queue.front();
        queue.pop_front();
        for (auto& [c, child] : nodes_[state].next) {
            int32_t f = nodes_[state].fail;
            while (f != 0 && !nodes_[f].next.count(c)) f = nodes_[f].fail;
            auto it = nodes_[f].next.find(c);
            int32_t target = (it != nodes_[f].next.end() && it->second != child)
                                 ? it->second
                                 : 0;
            nodes_[child].fail = target;
            nodes_[child].output_link = nodes_[target].outputs.empty()
                                            ? nodes_[target].output_link
                                            : target;
            queue.push_back(child);
        }
    }
    built_ = true;
}

int32_t MultiPatternMatcher::step(int32_t state, char32_t c) const {
    for (;;) {
        auto it = nodes_[state].next.find(c);
        if (it != nodes_[state].next.end()) return it->second;
        if (state == 0) return 0;
        state = nodes_[state].fail;
    }
}

void MultiPatternMatcher::find_all(
    std::u32string_view text,
    const std::function<void(const Occurrence&)>& on_match) const {
    assert(built_);
    int32_t state = 0;
    for (uint32_t i = 0; i < text.size(); ++i) {
        state = step(state, text[i]);
        int32_t s = nodes_[state].outputs.empty() ? nodes_[state].output_link
                                                  : state;
        while (s != -1) {
            for (uint32_t p : nodes_[s].outputs) {
                uint32_t len = static_cast<uint32_t>(patterns_[p].size());
                on_match(Occurrence{i + 1 - len, i + 1, p});
            }
            s = nodes_[s].output_link;
        }
    }
}

std::vector<MultiPatternMatcher::Occurrence> MultiPatternMatcher::find_all(
    std::u32string_view text) const {
    std::vector<Occurrence> out;
    find_all(text, [&](const Occurrence& o) { out.push_back(o); });
    return out;
}

}  // namespace decontam
