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

// Per-sequence leakage report: how often each extracted sequence was
// predicted (and for how many users), how often it occurs in the training
// data (and for how many users), with the contexts and perplexities of every
// correct prediction.

#ifndef LEAKAUDIT_STATS_H_
#define LEAKAUDIT_STATS_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "leakaudit/aho_corasick.h"
#include "leakaudit/corpus.h"
#include "leakaudit/extractor.h"
#include "leakaudit/language_model.h"
#include "leakaudit/perplexity.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

// Runs grouped by exact token sequence.
struct AggregatedSequence {
  std::vector<TokenId> sequence;
  std::uint64_t total_in_s = 0;
  std::uint64_t user_in_s = 0;
  // Aligned, in RunMultiset order.
  std::vector<std::vector<TokenId>> contexts;
  std::vector<std::vector<double>> token_log_probs;
  // Distinct owning users, sorted.
  std::vector<std::string> owners;

  friend bool operator==(const AggregatedSequence&,
                         const AggregatedSequence&) = default;
};

// Groups come back ordered by token-id sequence.
inline std::vector<AggregatedSequence> AggregateRuns(const RunMultiset& runs) {
  std::map<std::vector<TokenId>, AggregatedSequence> groups;
  std::map<std::vector<TokenId>, std::set<std::string>> users;
  for (const Run& r : runs) {
    auto& g = groups[r.tokens];
    g.sequence = r.tokens;
    ++g.total_in_s;
    g.contexts.push_back(r.context_tokens);
    g.token_log_probs.push_back(r.token_log_probs);
    users[r.tokens].insert(r.user_id);
  }
  std::vector<AggregatedSequence> out;
  out.reserve(groups.size());
  for (auto& [seq, g] : groups) {
    const auto& u = users[seq];
    g.user_in_s = u.size();
    g.owners.assign(u.begin(), u.end());
    out.push_back(std::move(g));
  }
  return out;
}

struct CorpusCounts {
  std::uint64_t total_in_d = 0;
  std::uint64_t user_in_d = 0;

  friend bool operator==(const CorpusCounts&, const CorpusCounts&) = default;
};

namespace internal {

// Per-pattern occurrence totals and the (sorted, distinct) user ordinals
// seen so far. Merges by addition and set union.
struct CountPartial {
  std::vector<std::uint64_t> totals;
  std::vector<std::vector<std::uint32_t>> users;

  friend bool operator==(const CountPartial&, const CountPartial&) = default;
};

inline CountPartial EmptyCountPartial(std::size_t n_patterns) {
  return {std::vector<std::uint64_t>(n_patterns),
          std::vector<std::vector<std::uint32_t>>(n_patterns)};
}

inline void MergeCountPartial(CountPartial& into, const CountPartial& from) {
  for (std::size_t p = 0; p < into.totals.size(); ++p) {
    into.totals[p] += from.totals[p];
    std::vector<std::uint32_t> merged;
    merged.reserve(into.users[p].size() + from.users[p].size());
    std::set_union(into.users[p].begin(), into.users[p].end(),
                   from.users[p].begin(), from.users[p].end(),
                   std::back_inserter(merged));
    into.users[p] = std::move(merged);
  }
}

inline std::vector<CorpusCounts> FinalizeCounts(const CountPartial& partial) {
  std::vector<CorpusCounts> out(partial.totals.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = {partial.totals[p], partial.users[p].size()};
  }
  return out;
}

// Index of each document's user in corpus.users().
inline std::vector<std::uint32_t> DocumentUserOrdinals(
    const BasicCorpus<TokenId>& corpus) {
  std::vector<std::uint32_t> ord(corpus.size());
  for (std::size_t u = 0; u < corpus.users().size(); ++u) {
    for (std::size_t d : corpus.user_index().at(corpus.users()[u])) {
      ord[d] = static_cast<std::uint32_t>(u);
    }
  }
  return ord;
}

inline CountPartial CountDocuments(const AhoCorasick<TokenId>& automaton,
                                   const BasicCorpus<TokenId>& corpus,
                                   std::span<const std::uint32_t> user_ordinal,
                                   std::span<const std::size_t> doc_indices) {
  CountPartial partial = EmptyCountPartial(automaton.pattern_count());
  for (std::size_t d : doc_indices) {
    const std::uint32_t u = user_ordinal[d];
    automaton.Scan(std::span<const TokenId>(corpus.documents()[d].tokens),
                   [&](std::size_t p, std::size_t) {
                     ++partial.totals[p];
                     auto& us = partial.users[p];
                     if (us.empty() || us.back() != u) us.push_back(u);
                   });
  }
  for (auto& us : partial.users) {
    std::sort(us.begin(), us.end());
    us.erase(std::unique(us.begin(), us.end()), us.end());
  }
  return partial;
}

}  // namespace internal

// Occurrence counts of each pattern in the corpus, overlapping matches
// included and never spanning two documents. One automaton pass.
inline absl::StatusOr<std::vector<CorpusCounts>> CountInCorpus(
    std::span<const std::vector<TokenId>> patterns,
    const BasicCorpus<TokenId>& corpus) {
  LEAKAUDIT_ASSIGN_OR_RETURN(auto automaton,
                             AhoCorasick<TokenId>::Build(patterns));
  const auto ordinals = internal::DocumentUserOrdinals(corpus);
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return internal::FinalizeCounts(
      internal::CountDocuments(automaton, corpus, ordinals, all));
}

struct PublicComparison {
  // Aligned with the row's contexts.
  std::vector<double> pp_public;
  std::vector<double> log_ratio;
  bool plausibly_public = false;

  friend bool operator==(const PublicComparison&, const PublicComparison&) =
      default;
};

struct ReportRow {
  std::vector<std::string> sequence;  // empty when redacted
  std::size_t sequence_length = 0;
  std::uint64_t total_in_s = 0;
  std::uint64_t user_in_s = 0;
  std::uint64_t total_in_d = 0;
  std::uint64_t user_in_d = 0;
  std::vector<std::vector<std::string>> contexts;  // empty when redacted
  std::vector<std::size_t> context_lengths;
  std::vector<double> perplexities;
  std::vector<std::string> owners;  // empty when redacted
  std::optional<PublicComparison> public_comparison;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct LeakageReport {
  std::vector<ReportRow> rows;
  ExtractionConfig config;
  bool redacted = false;
};

// Count relations every row must satisfy.
inline absl::Status ValidateRow(const ReportRow& r) {
  const bool ok = 1 <= r.user_in_s && r.user_in_s <= r.total_in_s &&
                  r.total_in_s <= r.total_in_d && r.user_in_s <= r.user_in_d &&
                  r.user_in_d <= r.total_in_d &&
                  r.context_lengths.size() == r.total_in_s &&
                  r.perplexities.size() == r.total_in_s;
  if (ok) return absl::OkStatus();
  return absl::InternalError(absl::StrCat(
      "report row violates count invariants: S=(", r.total_in_s, ",",
      r.user_in_s, ") D=(", r.total_in_d, ",", r.user_in_d, ")"));
}

inline LeakageReport Redact(LeakageReport report) {
  for (auto& r : report.rows) {
    r.sequence.clear();
    r.contexts.clear();
    r.owners.clear();
  }
  report.redacted = true;
  return report;
}

// Joins grouped runs with their corpus counts. Rows are ordered longest
// sequence first, then by token strings.
inline absl::StatusOr<LeakageReport> AssembleReport(
    std::vector<AggregatedSequence> groups, std::span<const CorpusCounts> counts,
    const Vocabulary& vocab, const ExtractionConfig& config, bool redact) {
  if (groups.size() != counts.size()) {
    return absl::InvalidArgumentError("count list does not match groups");
  }
  auto decode = [&vocab](std::span<const TokenId> ids) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (TokenId t : ids) out.push_back(vocab.Token(t));
    return out;
  };
  LeakageReport report;
  report.config = config;
  report.rows.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto& g = groups[i];
    ReportRow row;
    row.sequence = decode(g.sequence);
    row.sequence_length = g.sequence.size();
    row.total_in_s = g.total_in_s;
    row.user_in_s = g.user_in_s;
    row.total_in_d = counts[i].total_in_d;
    row.user_in_d = counts[i].user_in_d;
    for (std::size_t c = 0; c < g.contexts.size(); ++c) {
      row.contexts.push_back(decode(g.contexts[c]));
      row.context_lengths.push_back(g.contexts[c].size());
      LEAKAUDIT_ASSIGN_OR_RETURN(auto pp,
                                 PerplexityFromLogProbs(g.token_log_probs[c]));
      row.perplexities.push_back(pp.value);
    }
    row.owners = std::move(g.owners);
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) {
              if (a.sequence_length != b.sequence_length) {
                return a.sequence_length > b.sequence_length;
              }
              return a.sequence < b.sequence;
            });
  return redact ? Redact(std::move(report)) : report;
}

inline std::vector<std::vector<TokenId>> Sequences(
    std::span<const AggregatedSequence> groups) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.sequence);
  return out;
}

inline absl::StatusOr<LeakageReport> BuildReport(
    const RunMultiset& runs, const EncodedCorpus& corpus,
    const LanguageModel& model, bool redact,
    const ExtractionConfig& config = {}) {
  LEAKAUDIT_RETURN_IF_ERROR(CheckVocabularyMatch(model, corpus));
  auto groups = AggregateRuns(runs);
  const auto patterns = Sequences(groups);
  LEAKAUDIT_ASSIGN_OR_RETURN(auto counts, CountInCorpus(patterns, corpus));
  return AssembleReport(std::move(groups), counts, corpus.vocab(), config,
                        redact);
}

// Rows whose sequence occurs in exactly one user's data.
inline LeakageReport FilterUnique(LeakageReport report) {
  std::erase_if(report.rows,
                [](const ReportRow& r) { return r.user_in_d != 1; });
  return report;
}

// Rows whose sequence occurs exactly once in the whole corpus.
inline LeakageReport FilterSingleton(LeakageReport report) {
  std::erase_if(report.rows,
                [](const ReportRow& r) { return r.total_in_d != 1; });
  return report;
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_STATS_H_
