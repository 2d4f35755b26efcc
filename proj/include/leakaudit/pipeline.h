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

// Partition-batched parallel execution of the extraction, counting and
// scoring passes. Each partition is an independent unit of work; partial
// results are merged in partition-id order so the output never depends on the
// plan or on which worker finished first.

#ifndef LEAKAUDIT_PIPELINE_H_
#define LEAKAUDIT_PIPELINE_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "leakaudit/aho_corasick.h"
#include "leakaudit/corpus.h"
#include "leakaudit/extractor.h"
#include "leakaudit/language_model.h"
#include "leakaudit/metrics.h"
#include "leakaudit/perplexity.h"
#include "leakaudit/stats.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

inline constexpr char kWorkersEnvVar[] = "LEAKAUDIT_WORKERS";

class PartitionPlan {
 public:
  // Contiguous, near-equal item ranges.
  static absl::StatusOr<PartitionPlan> Contiguous(
      std::size_t n_items, std::size_t n_partitions,
      std::size_t batch_size = kDefaultBatchSize) {
    if (n_partitions < 1) {
      return absl::InvalidArgumentError("n_partitions must be >= 1");
    }
    std::vector<std::uint32_t> assignment(n_items);
    for (std::size_t p = 0; p < n_partitions; ++p) {
      const std::size_t lo = p * n_items / n_partitions;
      const std::size_t hi = (p + 1) * n_items / n_partitions;
      for (std::size_t i = lo; i < hi; ++i) {
        assignment[i] = static_cast<std::uint32_t>(p);
      }
    }
    return FromAssignment(std::move(assignment), n_partitions, batch_size);
  }

  static absl::StatusOr<PartitionPlan> FromAssignment(
      std::vector<std::uint32_t> assignment, std::size_t n_partitions,
      std::size_t batch_size = kDefaultBatchSize) {
    if (n_partitions < 1) {
      return absl::InvalidArgumentError("n_partitions must be >= 1");
    }
    if (batch_size < 1) {
      return absl::InvalidArgumentError("batch_size must be >= 1");
    }
    PartitionPlan plan;
    plan.members_.resize(n_partitions);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] >= n_partitions) {
        return absl::InvalidArgumentError(
            absl::StrCat("item ", i, " assigned to partition ", assignment[i],
                         " of ", n_partitions));
      }
      plan.members_[assignment[i]].push_back(i);
    }
    plan.assignment_ = std::move(assignment);
    plan.batch_size_ = batch_size;
    return plan;
  }

  std::size_t n_partitions() const { return members_.size(); }
  std::size_t n_items() const { return assignment_.size(); }
  std::size_t batch_size() const { return batch_size_; }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }
  // Item indices of partition p, ascending.
  std::span<const std::size_t> Members(std::size_t p) const {
    return members_.at(p);
  }

 private:
  PartitionPlan() = default;

  std::vector<std::uint32_t> assignment_;
  std::vector<std::vector<std::size_t>> members_;
  std::size_t batch_size_ = kDefaultBatchSize;
};

struct PoolOptions {
  std::size_t workers = 1;
};

// `fallback` unless LEAKAUDIT_WORKERS holds a positive integer.
inline std::size_t WorkersFromEnvironment(std::size_t fallback) {
  const char* v = std::getenv(kWorkersEnvVar);
  std::size_t n = 0;
  if (v != nullptr && absl::SimpleAtoi(v, &n) && n > 0) return n;
  return fallback;
}

template <typename T>
using Partials = std::vector<std::pair<std::size_t, T>>;

// Runs fn(p) for every partition on up to `workers` threads. Partials come
// back in completion order. The first failure stops the pool; the error
// reported is the one with the lowest partition id among those that failed.
template <typename T, typename Fn>
absl::StatusOr<Partials<T>> RunOnPool(std::size_t n_partitions,
                                      const PoolOptions& options, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  Partials<T> partials;
  std::optional<std::pair<std::size_t, absl::Status>> error;
  auto work = [&] {
    for (;;) {
      const std::size_t p = next.fetch_add(1);
      if (p >= n_partitions || failed.load()) return;
      absl::StatusOr<T> r = fn(p);
      std::lock_guard<std::mutex> lock(mu);
      if (!r.ok()) {
        failed.store(true);
        if (!error || p < error->first) error.emplace(p, r.status());
      } else {
        partials.emplace_back(p, *std::move(r));
      }
    }
  };
  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(options.workers, n_partitions));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (error) {
    return absl::Status(error->second.code(),
                        absl::StrCat("partition ", error->first, ": ",
                                     error->second.message()));
  }
  return partials;
}

// Folds partials in partition-id order, whatever order they arrived in.
// Every partition of the plan must be present exactly once.
template <typename T, typename Combine>
absl::StatusOr<T> MergePartials(Partials<T> partials, const PartitionPlan& plan,
                                Combine&& combine) {
  std::sort(partials.begin(), partials.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t p = 0; p < plan.n_partitions(); ++p) {
    if (p >= partials.size() || partials[p].first != p) {
      return absl::FailedPreconditionError(
          absl::StrCat("missing partial for partition ", p));
    }
  }
  if (partials.size() != plan.n_partitions()) {
    return absl::FailedPreconditionError("unexpected extra partials");
  }
  T out = std::move(partials.front().second);
  for (std::size_t p = 1; p < partials.size(); ++p) {
    combine(out, std::move(partials[p].second));
  }
  return out;
}

inline absl::StatusOr<RunMultiset> MergeRuns(Partials<RunMultiset> partials,
                                             const PartitionPlan& plan) {
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto runs, MergePartials(std::move(partials), plan,
                               [](RunMultiset& into, RunMultiset&& from) {
                                 into.insert(into.end(),
                                             std::make_move_iterator(from.begin()),
                                             std::make_move_iterator(from.end()));
                               }));
  SortRuns(runs);
  return runs;
}

inline absl::StatusOr<internal::CountPartial> MergeCounts(
    Partials<internal::CountPartial> partials, const PartitionPlan& plan) {
  return MergePartials(std::move(partials), plan,
                       [](internal::CountPartial& into,
                          internal::CountPartial&& from) {
                         internal::MergeCountPartial(into, from);
                       });
}

inline absl::Status CheckPlanCovers(const PartitionPlan& plan,
                                    std::size_t n_items) {
  if (plan.n_items() != n_items) {
    return absl::InvalidArgumentError(absl::StrCat(
        "partition plan covers ", plan.n_items(), " items, input has ",
        n_items));
  }
  return absl::OkStatus();
}

inline absl::StatusOr<RunMultiset> ParallelExtract(
    const LanguageModel& model, const EncodedCorpus& corpus,
    const ExtractionConfig& config, const PartitionPlan& plan,
    const PoolOptions& options = {}) {
  LEAKAUDIT_RETURN_IF_ERROR(config.Validate());
  LEAKAUDIT_RETURN_IF_ERROR(CheckVocabularyMatch(model, corpus));
  LEAKAUDIT_RETURN_IF_ERROR(CheckTopKWidth(config.k, model.vocab_size()));
  LEAKAUDIT_RETURN_IF_ERROR(CheckPlanCovers(plan, corpus.size()));
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto partials,
      RunOnPool<RunMultiset>(
          plan.n_partitions(), options,
          [&](std::size_t p) -> absl::StatusOr<RunMultiset> {
            return internal::ExtractDocuments(model, corpus, config,
                                              plan.Members(p),
                                              plan.batch_size());
          }));
  return MergeRuns(std::move(partials), plan);
}

inline absl::StatusOr<std::vector<CorpusCounts>> ParallelCount(
    std::span<const std::vector<TokenId>> patterns,
    const BasicCorpus<TokenId>& corpus, const PartitionPlan& plan,
    const PoolOptions& options = {}) {
  LEAKAUDIT_RETURN_IF_ERROR(CheckPlanCovers(plan, corpus.size()));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto automaton,
                             AhoCorasick<TokenId>::Build(patterns));
  const auto ordinals = internal::DocumentUserOrdinals(corpus);
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto partials,
      RunOnPool<internal::CountPartial>(
          plan.n_partitions(), options,
          [&](std::size_t p) -> absl::StatusOr<internal::CountPartial> {
            return internal::CountDocuments(automaton, corpus, ordinals,
                                            plan.Members(p));
          }));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto merged,
                             MergeCounts(std::move(partials), plan));
  return internal::FinalizeCounts(merged);
}

namespace internal {

using ScoredItems = std::vector<std::pair<std::size_t, PerplexityValue>>;

inline absl::StatusOr<ScoredItems> ScoreItems(
    const LanguageModel& model, std::span<const ScoringItem> items,
    std::span<const std::size_t> indices, std::size_t batch_size) {
  std::vector<std::vector<TokenId>> full;
  full.reserve(indices.size());
  std::vector<PositionQuery> queries;
  for (std::size_t i : indices) {
    const auto& it = items[i];
    if (it.sequence.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("scoring item ", i, " has an empty sequence"));
    }
    auto& f = full.emplace_back(it.context);
    f.insert(f.end(), it.sequence.begin(), it.sequence.end());
  }
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const auto& it = items[indices[n]];
    const auto& f = full[n];
    for (std::size_t t = 0; t < it.sequence.size(); ++t) {
      const std::size_t ctx_len = it.context.size() + t;
      queries.push_back({std::span<const TokenId>(f.data(), ctx_len), f[ctx_len],
                         1, false});
    }
  }
  std::vector<double> log_probs;
  log_probs.reserve(queries.size());
  for (std::size_t b = 0; b < queries.size(); b += batch_size) {
    const std::size_t n = std::min(batch_size, queries.size() - b);
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto scores,
        model.ScorePositions(std::span<const PositionQuery>(&queries[b], n)));
    if (scores.size() != n) {
      return absl::InternalError("model returned a short score batch");
    }
    for (const auto& s : scores) log_probs.push_back(s.target_log_prob);
  }
  ScoredItems out;
  std::size_t offset = 0;
  for (std::size_t i : indices) {
    const std::size_t len = items[i].sequence.size();
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto pp, PerplexityFromLogProbs(
                     std::span<const double>(log_probs).subspan(offset, len)));
    out.emplace_back(i, pp);
    offset += len;
  }
  return out;
}

}  // namespace internal

// Perplexity of each item's sequence given its context, in item order.
inline absl::StatusOr<std::vector<PerplexityValue>> ParallelScore(
    const LanguageModel& model, std::span<const ScoringItem> items,
    const PartitionPlan& plan, const PoolOptions& options = {}) {
  LEAKAUDIT_RETURN_IF_ERROR(CheckPlanCovers(plan, items.size()));
  std::vector<PerplexityValue> out(items.size());
  if (items.empty()) return out;
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto partials,
      RunOnPool<internal::ScoredItems>(
          plan.n_partitions(), options,
          [&](std::size_t p) -> absl::StatusOr<internal::ScoredItems> {
            return internal::ScoreItems(model, items, plan.Members(p),
                                        plan.batch_size());
          }));
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto merged,
      MergePartials(std::move(partials), plan,
                    [](internal::ScoredItems& into,
                       internal::ScoredItems&& from) {
                      into.insert(into.end(), from.begin(), from.end());
                    }));
  for (const auto& [i, pp] : merged) out[i] = pp;
  return out;
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_PIPELINE_H_
