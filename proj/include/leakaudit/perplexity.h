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

#ifndef LEAKAUDIT_PERPLEXITY_H_
#define LEAKAUDIT_PERPLEXITY_H_

#include <cmath>
#include <cstddef>
#include <span>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "leakaudit/language_model.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

struct PerplexityValue {
  double value = 0.0;
  std::size_t n_tokens = 0;

  friend bool operator==(const PerplexityValue&, const PerplexityValue&) =
      default;
};

// exp of the negative mean natural-log probability.
inline absl::StatusOr<PerplexityValue> PerplexityFromLogProbs(
    std::span<const double> log_probs) {
  if (log_probs.empty()) {
    return absl::InvalidArgumentError("perplexity of an empty sequence");
  }
  double sum = 0.0;
  for (double lp : log_probs) sum += lp;
  const auto n = log_probs.size();
  return PerplexityValue{std::exp(-sum / static_cast<double>(n)), n};
}

inline absl::StatusOr<PerplexityValue> Perplexity(
    const LanguageModel& model, std::span<const TokenId> context,
    std::span<const TokenId> sequence) {
  LEAKAUDIT_ASSIGN_OR_RETURN(auto lps,
                             SequenceLogProb(model, context, sequence));
  return PerplexityFromLogProbs(lps);
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_PERPLEXITY_H_
