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

// Leakage epsilon: the worst-case natural-log ratio of a public model's
// perplexity to the audited model's perplexity over unique sequences, plus
// the leave-out protocol that produces a public model from the corpus itself.

#ifndef LEAKAUDIT_METRICS_H_
#define LEAKAUDIT_METRICS_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "leakaudit/corpus.h"
#include "leakaudit/language_model.h"
#include "leakaudit/perplexity.h"
#include "leakaudit/stats.h"
#include "leakaudit/status_macros.h"
#include "leakaudit/version.h"

namespace leakaudit {

struct SequenceRatio {
  std::string sequence;
  double pp_lm = 0.0;
  double pp_public = 0.0;
  double log_ratio = 0.0;

  friend bool operator==(const SequenceRatio&, const SequenceRatio&) = default;
};

struct EpsilonResult {
  std::vector<SequenceRatio> per_sequence;
  // Absent when there were no sequences.
  std::optional<double> epsilon_l;
};

struct PerplexityPair {
  std::string sequence;
  double pp_lm = 0.0;
  double pp_public = 0.0;
};

inline absl::StatusOr<EpsilonResult> EpsilonFromPerplexities(
    std::span<const PerplexityPair> pairs) {
  EpsilonResult result;
  for (const auto& p : pairs) {
    if (!(p.pp_lm > 0.0) || !(p.pp_public > 0.0) || !std::isfinite(p.pp_lm) ||
        !std::isfinite(p.pp_public)) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-positive or non-finite perplexity for \"",
                       p.sequence, "\""));
    }
    const double ratio = std::log(p.pp_public / p.pp_lm);
    result.per_sequence.push_back({p.sequence, p.pp_lm, p.pp_public, ratio});
    result.epsilon_l =
        result.epsilon_l ? std::max(*result.epsilon_l, ratio) : ratio;
  }
  return result;
}

namespace internal {

inline std::vector<TokenId> EncodeTokens(const Vocabulary& vocab,
                                         std::span<const std::string> tokens) {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(vocab.Lookup(t));
  return out;
}

inline absl::Status RequirePlainRows(std::span<const ReportRow> rows) {
  for (const auto& r : rows) {
    if (r.sequence.empty() || r.contexts.empty()) {
      return absl::FailedPreconditionError(
          "report rows must carry sequences and contexts (not redacted)");
    }
  }
  return absl::OkStatus();
}

}  // namespace internal

// One (context, sequence) scoring item per row, using the row's first context.
struct ScoringItem {
  std::vector<TokenId> context;
  std::vector<TokenId> sequence;
};

inline absl::StatusOr<std::vector<ScoringItem>> EpsilonScoringItems(
    std::span<const ReportRow> rows, const Vocabulary& vocab) {
  LEAKAUDIT_RETURN_IF_ERROR(internal::RequirePlainRows(rows));
  std::vector<ScoringItem> items;
  items.reserve(rows.size());
  for (const auto& r : rows) {
    items.push_back({internal::EncodeTokens(vocab, r.contexts.front()),
                     internal::EncodeTokens(vocab, r.sequence)});
  }
  return items;
}

// Rows are expected to be unique-filtered already.
inline absl::StatusOr<EpsilonResult> LeakageEpsilon(
    std::span<const ReportRow> rows, const Vocabulary& vocab,
    const LanguageModel& private_model, const LanguageModel& public_model) {
  LEAKAUDIT_ASSIGN_OR_RETURN(auto items, EpsilonScoringItems(rows, vocab));
  std::vector<PerplexityPair> pairs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto lm, Perplexity(private_model, items[i].context, items[i].sequence));
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto pub, Perplexity(public_model, items[i].context, items[i].sequence));
    pairs.push_back({absl::StrJoin(rows[i].sequence, " "), lm.value, pub.value});
  }
  return EpsilonFromPerplexities(pairs);
}

inline std::string DisplayFixed2(double x) {
  return absl::StrFormat("%.2f", x);
}

inline nlohmann::ordered_json EpsilonToJson(const EpsilonResult& result) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  auto& rows = j["per_sequence"] = nlohmann::ordered_json::array();
  for (const auto& r : result.per_sequence) {
    rows.push_back({{"sequence", r.sequence},
                    {"pp_lm", r.pp_lm},
                    {"pp_public", r.pp_public},
                    {"log_ratio", r.log_ratio},
                    {"display",
                     {{"pp_lm", DisplayFixed2(r.pp_lm)},
                      {"pp_public", DisplayFixed2(r.pp_public)},
                      {"log_ratio", DisplayFixed2(r.log_ratio)}}}});
  }
  j["epsilon_l"] = result.epsilon_l ? nlohmann::ordered_json(*result.epsilon_l)
                                    : nlohmann::ordered_json(nullptr);
  j["epsilon_l_display"] =
      result.epsilon_l ? DisplayFixed2(*result.epsilon_l) : std::string("-");
  return j;
}

// Tab-separated table; an absent epsilon renders as "-".
inline std::string RenderEpsilonTable(const EpsilonResult& result) {
  std::ostringstream out;
  out << "sequence\tpp_lm\tpp_public\tlog_ratio\n";
  for (const auto& r : result.per_sequence) {
    out << r.sequence << '\t' << DisplayFixed2(r.pp_lm) << '\t'
        << DisplayFixed2(r.pp_public) << '\t' << DisplayFixed2(r.log_ratio)
        << '\n';
  }
  out << "epsilon_l\t"
      << (result.epsilon_l ? DisplayFixed2(*result.epsilon_l) : "-") << '\n';
  return out.str();
}

// Adds per-context public perplexities and log-ratios against the report's
// stored perplexities. A row is plausibly public when none of its ratios
// exceeds `flag_threshold` (plus a little slack: recomputing a stored
// perplexity is only exact up to rounding).
inline absl::StatusOr<LeakageReport> AnnotatePublicComparison(
    LeakageReport report, const Vocabulary& vocab,
    const LanguageModel& public_model, double flag_threshold = 0.0) {
  LEAKAUDIT_RETURN_IF_ERROR(internal::RequirePlainRows(report.rows));
  for (auto& r : report.rows) {
    const auto seq = internal::EncodeTokens(vocab, r.sequence);
    PublicComparison pc;
    double worst = -HUGE_VAL;
    for (std::size_t c = 0; c < r.contexts.size(); ++c) {
      LEAKAUDIT_ASSIGN_OR_RETURN(
          auto pp, Perplexity(public_model,
                              internal::EncodeTokens(vocab, r.contexts[c]), seq));
      pc.pp_public.push_back(pp.value);
      pc.log_ratio.push_back(std::log(pp.value / r.perplexities.at(c)));
      worst = std::max(worst, pc.log_ratio.back());
    }
    pc.plausibly_public = worst <= flag_threshold + 1e-9;
    r.public_comparison = std::move(pc);
  }
  return report;
}

// Users owning the runs behind each row.
inline absl::StatusOr<std::set<std::string>> OwnerUsers(
    const LeakageReport& report) {
  if (report.redacted) {
    return absl::FailedPreconditionError(
        "owner users cannot be derived from a redacted report");
  }
  std::set<std::string> owners;
  for (const auto& r : report.rows) {
    if (r.owners.empty()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "row \"", absl::StrJoin(r.sequence, " "), "\" has no owner users"));
    }
    owners.insert(r.owners.begin(), r.owners.end());
  }
  return owners;
}

// Trains a public model on every user except `owner_users`.
template <typename Trainer>
auto LeaveOutPublicModel(const EncodedCorpus& corpus,
                         const std::set<std::string>& owner_users,
                         Trainer&& train) -> decltype(train(corpus)) {
  EncodedCorpus kept = ExcludeUsers(corpus, owner_users);
  if (kept.empty()) {
    return absl::InvalidArgumentError(
        "leave-out excludes every user; nothing left to train on");
  }
  return train(kept);
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_METRICS_H_
