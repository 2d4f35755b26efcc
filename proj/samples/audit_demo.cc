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

// Small end-to-end audit: a forum where one user repeats a private
// sentence. Trains an n-gram model on everything, extracts what the model
// reproduces, and scores the unique sequences against a model trained
// without their owners.

#include <iostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "leakaudit/leakaudit.h"

namespace {

using namespace leakaudit;  // NOLINT

absl::Status Demo() {
  const std::vector<std::string> chatter = {
      "the game was great last night",
      "I think the game was too long",
      "did you see the game last night",
      "the weather is great today",
      "I think the weather will change",
  };
  Corpus corpus;
  for (int u = 0; u < 8; ++u) {
    for (int d = 0; d < 3; ++d) {
      std::string text = chatter[(u + d) % chatter.size()];
      if (u == 3 && d < 2) text += " my locker code is four nine two seven";
      LEAKAUDIT_RETURN_IF_ERROR(corpus.Add(
          {absl::StrCat("user", u), absl::StrCat(d), Tokenize(text)}));
    }
  }

  LEAKAUDIT_ASSIGN_OR_RETURN(auto v, BuildVocabTopK(corpus, 1000));
  auto vocab = std::make_shared<const Vocabulary>(std::move(v));
  const EncodedCorpus encoded = Encode(corpus, vocab);
  LEAKAUDIT_ASSIGN_OR_RETURN(auto model, TrainNgram(encoded));

  LEAKAUDIT_ASSIGN_OR_RETURN(auto runs, ExtractRuns(model, encoded, {}));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto report,
                             BuildReport(runs, encoded, model, false));
  const LeakageReport unique = FilterUnique(report);
  std::cout << report.rows.size() << " extracted sequences, "
            << unique.rows.size() << " used by a single user\n\n";
  LEAKAUDIT_RETURN_IF_ERROR(ExportCsv(unique, std::cout).status());

  LEAKAUDIT_ASSIGN_OR_RETURN(auto owners, OwnerUsers(unique));
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto pub, LeaveOutPublicModel(encoded, owners, [](const EncodedCorpus& c) {
        return TrainNgram(c);
      }));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto eps,
                             LeakageEpsilon(unique.rows, *vocab, model, pub));
  std::cout << "\n" << RenderEpsilonTable(eps);
  return absl::OkStatus();
}

}  // namespace

int main() {
  if (auto s = Demo(); !s.ok()) {
    std::cerr << "error: " << s << "\n";
    return 1;
  }
  return 0;
}
