// Copyright 2026 The Leakaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LEAKAUDIT_AHO_CORASICK_H_
#define LEAKAUDIT_AHO_CORASICK_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace leakaudit {

// Multi-pattern matcher over an arbitrary symbol alphabet. Reports every
// occurrence of every pattern, overlapping ones included, in one pass.
template <typename Symbol>
class AhoCorasick {
 public:
  // Patterns may repeat; each index gets its own report. Empty patterns are
  // rejected.
  static absl::StatusOr<AhoCorasick> Build(
      std::span<const std::vector<Symbol>> patterns) {
    AhoCorasick ac;
    ac.nodes_.emplace_back();
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      if (patterns[p].empty()) {
        return absl::InvalidArgumentError("empty pattern");
      }
      std::int32_t state = 0;
      for (const Symbol& s : patterns[p]) {
        auto it = ac.nodes_[state].next.find(s);
        if (it == ac.nodes_[state].next.end()) {
          const auto child = static_cast<std::int32_t>(ac.nodes_.size());
          ac.nodes_[state].next.emplace(s, child);
          ac.nodes_.emplace_back();
          state = child;
        } else {
          state = it->second;
        }
      }
      ac.nodes_[state].outputs.push_back(p);
    }
    ac.pattern_count_ = patterns.size();

    // Breadth-first failure and dictionary-suffix links.
    std::deque<std::int32_t> queue;
    for (const auto& [s, child] : ac.nodes_[0].next) {
      ac.nodes_[child].fail = 0;
      queue.push_back(child);
    }
    while (!queue.empty()) {
      const std::int32_t u = queue.front();
      queue.pop_front();
      for (const auto& [s, v] : ac.nodes_[u].next) {
        std::int32_t f = ac.nodes_[u].fail;
        while (f != 0 && !ac.nodes_[f].next.contains(s)) f = ac.nodes_[f].fail;
        auto it = ac.nodes_[f].next.find(s);
        const std::int32_t fv =
            (it != ac.nodes_[f].next.end() && it->second != v) ? it->second : 0;
        ac.nodes_[v].fail = fv;
        ac.nodes_[v].dict = ac.nodes_[fv].outputs.empty() ? ac.nodes_[fv].dict
                                                          : fv;
        queue.push_back(v);
      }
    }
    return ac;
  }

  std::size_t pattern_count() const { return pattern_count_; }

  // Calls on_match(pattern_index, last) for each occurrence; `last` is the
  // index of the occurrence's final symbol.
  template <typename OnMatch>
  void Scan(std::span<const Symbol> text, OnMatch&& on_match) const {
    std::int32_t state = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const Symbol& s = text[i];
      for (;;) {
        auto it = nodes_[state].next.find(s);
        if (it != nodes_[state].next.end()) {
          state = it->second;
          break;
        }
        if (state == 0) break;
        state = nodes_[state].fail;
      }
      for (std::int32_t o = nodes_[state].outputs.empty() ? nodes_[state].dict
                                                          : state;
           o > 0; o = nodes_[o].dict) {
        for (std::size_t p : nodes_[o].outputs) on_match(p, i);
      }
    }
  }

 private:
  struct Node {
    absl::flat_hash_map<Symbol, std::int32_t> next;
    std::int32_t fail = 0;
    // Nearest proper suffix state that ends a pattern; 0 when none.
    std::int32_t dict = 0;
    std::vector<std::size_t> outputs;
  };

  AhoCorasick() = default;

  std::vector<Node> nodes_;
  std::size_t pattern_count_ = 0;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_AHO_CORASICK_H_
