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

// Collection of the model's correct predictions over its own training data:
// every maximal block of consecutive positions whose true next token is in
// the model's top-k (k = 1 is the tab attack).

#ifndef LEAKAUDIT_EXTRACTOR_H_
#define LEAKAUDIT_EXTRACTOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "leakaudit/corpus.h"
#include "leakaudit/language_model.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

inline constexpr std::size_t kDefaultBatchSize = 64;

struct ExtractionConfig {
  std::size_t k = 1;
  std::size_t min_run_len = 1;
  // Per-token perplexity cap 1/p(top-1); above it the model answers nothing.
  std::optional<double> confidence_threshold;
  bool count_unk_targets = false;

  absl::Status Validate() const {
    if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
    if (min_run_len < 1) {
      return absl::InvalidArgumentError("min_run_len must be >= 1");
    }
    if (confidence_threshold.has_value() &&
        !(*confidence_threshold > 1.0)) {
      return absl::InvalidArgumentError("confidence_threshold must be > 1");
    }
    return absl::OkStatus();
  }

  friend bool operator==(const ExtractionConfig&, const ExtractionConfig&) =
      default;
};

struct Run {
  std::string user_id;
  std::string doc_id;
  std::size_t start_pos = 0;
  std::vector<TokenId> tokens;
  std::vector<TokenId> context_tokens;  // document prefix [0, start_pos)
  std::vector<double> token_log_probs;

  std::size_t context_len() const { return start_pos; }

  friend bool operator==(const Run&, const Run&) = default;
};

// Ordered by (user_id, doc_id, start_pos).
using RunMultiset = std::vector<Run>;

inline bool RunKeyLess(const Run& a, const Run& b) {
  return std::tie(a.user_id, a.doc_id, a.start_pos) <
         std::tie(b.user_id, b.doc_id, b.start_pos);
}

inline void SortRuns(RunMultiset& runs) {
  std::sort(runs.begin(), runs.end(), RunKeyLess);
}

inline bool IsCorrectPosition(const PositionScore& s, TokenId target,
                              TokenId unk_id, const ExtractionConfig& config) {
  if (!s.target_in_top_k) return false;
  if (target == unk_id && !config.count_unk_targets) return false;
  if (config.confidence_threshold.has_value() &&
      !(1.0 / s.top1_prob <= *config.confidence_threshold)) {
    return false;
  }
  return true;
}

inline absl::Status CheckVocabularyMatch(const LanguageModel& model,
                                         const EncodedCorpus& corpus) {
  if (model.vocab_size() != corpus.vocab().size()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "model vocabulary size ", model.vocab_size(),
        " does not match corpus vocabulary size ", corpus.vocab().size()));
  }
  return absl::OkStatus();
}

namespace internal {

// Scans the given documents, answering position queries in batches of at
// most `batch_size`. Runs come back in document-visit order, unsorted.
inline absl::StatusOr<std::vector<Run>> ExtractDocuments(
    const LanguageModel& model, const EncodedCorpus& corpus,
    const ExtractionConfig& config, std::span<const std::size_t> doc_indices,
    std::size_t batch_size) {
  if (batch_size < 1) return absl::InvalidArgumentError("batch_size must be >= 1");
  const auto& docs = corpus.documents();
  std::vector<PositionQuery> queries;
  for (std::size_t di : doc_indices) {
    const auto& toks = docs[di].tokens;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      queries.push_back({std::span<const TokenId>(toks.data(), t), toks[t],
                         config.k, config.confidence_threshold.has_value()});
    }
  }
  std::vector<PositionScore> scores;
  scores.reserve(queries.size());
  for (std::size_t b = 0; b < queries.size(); b += batch_size) {
    const std::size_t n = std::min(batch_size, queries.size() - b);
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto batch,
        model.ScorePositions(std::span<const PositionQuery>(&queries[b], n)));
    if (batch.size() != n) {
      return absl::InternalError("model returned a short score batch");
    }
    scores.insert(scores.end(), batch.begin(), batch.end());
  }

  const TokenId unk = corpus.vocab().unk_id();
  std::vector<Run> runs;
  std::size_t qi = 0;
  for (std::size_t di : doc_indices) {
    const auto& doc = docs[di];
    const auto& toks = doc.tokens;
    std::optional<Run> open;
    auto flush = [&] {
      if (open && open->tokens.size() >= config.min_run_len) {
        runs.push_back(std::move(*open));
      }
      open.reset();
    };
    for (std::size_t t = 1; t < toks.size(); ++t, ++qi) {
      const PositionScore& s = scores[qi];
      if (!IsCorrectPosition(s, toks[t], unk, config)) {
        flush();
        continue;
      }
      if (!open) {
        open.emplace();
        open->user_id = doc.user_id;
        open->doc_id = doc.doc_id;
        open->start_pos = t;
        open->context_tokens.assign(toks.begin(), toks.begin() + t);
      }
      open->tokens.push_back(toks[t]);
      open->token_log_probs.push_back(s.target_log_prob);
    }
    flush();
  }
  return runs;
}

}  // namespace internal

// Single-threaded scan of the whole corpus.
inline absl::StatusOr<RunMultiset> ExtractRuns(
    const LanguageModel& model, const EncodedCorpus& corpus,
    const ExtractionConfig& config,
    std::size_t batch_size = kDefaultBatchSize) {
  LEAKAUDIT_RETURN_IF_ERROR(config.Validate());
  LEAKAUDIT_RETURN_IF_ERROR(CheckVocabularyMatch(model, corpus));
  LEAKAUDIT_RETURN_IF_ERROR(CheckTopKWidth(config.k, model.vocab_size()));
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto runs,
      internal::ExtractDocuments(model, corpus, config, all, batch_size));
  SortRuns(runs);
  return runs;
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_EXTRACTOR_H_
