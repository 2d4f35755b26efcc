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

#ifndef LEAKAUDIT_LANGUAGE_MODEL_H_
#define LEAKAUDIT_LANGUAGE_MODEL_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "leakaudit/corpus.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

// One next-token query issued while scanning a document.
struct PositionQuery {
  std::span<const TokenId> context;
  TokenId target = 0;
  std::size_t k = 1;
  bool need_top1_prob = false;
};

struct PositionScore {
  bool target_in_top_k = false;
  TokenId top1 = 0;
  // Only meaningful when the query asked for it.
  double top1_prob = 0.0;
  double target_log_prob = 0.0;

  friend bool operator==(const PositionScore&, const PositionScore&) = default;
};

// Ranking is always (probability descending, TokenId ascending).
inline bool RanksBefore(std::span<const double> dist, TokenId a, TokenId b) {
  if (dist[a] != dist[b]) return dist[a] > dist[b];
  return a < b;
}

inline std::vector<TokenId> RankTopK(std::span<const double> dist,
                                     std::size_t k) {
  std::vector<TokenId> ids(dist.size());
  std::iota(ids.begin(), ids.end(), TokenId{0});
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + k, ids.end(),
                    [&](TokenId a, TokenId b) { return RanksBefore(dist, a, b); });
  ids.resize(k);
  return ids;
}

// Number of tokens ranked strictly ahead of `target`.
inline std::size_t RankOf(std::span<const double> dist, TokenId target) {
  std::size_t rank = 0;
  for (TokenId w = 0; w < dist.size(); ++w) {
    if (w != target && RanksBefore(dist, w, target)) ++rank;
  }
  return rank;
}

inline TokenId ArgMax(std::span<const double> dist) {
  TokenId best = 0;
  for (TokenId w = 1; w < dist.size(); ++w) {
    if (dist[w] > dist[best]) best = w;
  }
  return best;
}

inline absl::Status CheckTopKWidth(std::size_t k, std::size_t vocab_size) {
  if (k < 1 || k > vocab_size) {
    return absl::InvalidArgumentError(
        absl::StrCat("top-k width ", k, " outside [1, ", vocab_size, "]"));
  }
  return absl::OkStatus();
}

// Token-level language model as consumed by the extraction scan. All
// probabilities are natural-log where logged.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;

  virtual absl::StatusOr<std::vector<double>> NextDistribution(
      std::span<const TokenId> context) const = 0;

  virtual absl::StatusOr<double> LogProb(std::span<const TokenId> context,
                                         TokenId token) const {
    if (token >= vocab_size()) {
      return absl::OutOfRangeError(absl::StrCat("token id ", token));
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(auto dist, NextDistribution(context));
    return std::log(dist[token]);
  }

  virtual absl::StatusOr<std::vector<TokenId>> TopK(
      std::span<const TokenId> context, std::size_t k) const {
    LEAKAUDIT_RETURN_IF_ERROR(CheckTopKWidth(k, vocab_size()));
    LEAKAUDIT_ASSIGN_OR_RETURN(auto dist, NextDistribution(context));
    return RankTopK(dist, k);
  }

  // Batch entry point used by the extraction and scoring passes.
  virtual absl::StatusOr<std::vector<PositionScore>> ScorePositions(
      std::span<const PositionQuery> queries) const {
    std::vector<PositionScore> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
      LEAKAUDIT_RETURN_IF_ERROR(CheckTopKWidth(q.k, vocab_size()));
      if (q.target >= vocab_size()) {
        return absl::OutOfRangeError(absl::StrCat("token id ", q.target));
      }
      LEAKAUDIT_ASSIGN_OR_RETURN(auto dist, NextDistribution(q.context));
      PositionScore s;
      s.target_in_top_k = RankOf(dist, q.target) < q.k;
      s.top1 = ArgMax(dist);
      s.top1_prob = dist[s.top1];
      s.target_log_prob = std::log(dist[q.target]);
      out.push_back(s);
    }
    return out;
  }
};

// Entry t is log p(sequence[t] | context ++ sequence[0, t)).
inline absl::StatusOr<std::vector<double>> SequenceLogProb(
    const LanguageModel& model, std::span<const TokenId> context,
    std::span<const TokenId> sequence) {
  if (sequence.empty()) {
    return absl::InvalidArgumentError("sequence must be non-empty");
  }
  std::vector<TokenId> prefix(context.begin(), context.end());
  prefix.reserve(context.size() + sequence.size());
  std::vector<double> out;
  out.reserve(sequence.size());
  for (TokenId t : sequence) {
    LEAKAUDIT_ASSIGN_OR_RETURN(double lp, model.LogProb(prefix, t));
    out.push_back(lp);
    prefix.push_back(t);
  }
  return out;
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_LANGUAGE_MODEL_H_
