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

#ifndef LEAKAUDIT_NGRAM_MODEL_H_
#define LEAKAUDIT_NGRAM_MODEL_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "leakaudit/corpus.h"
#include "leakaudit/language_model.h"
#include "leakaudit/status_macros.h"
#include "leakaudit/version.h"

namespace leakaudit {

inline constexpr int kDefaultNgramOrder = 3;
inline const std::vector<double>& DefaultNgramLambdas() {
  static const std::vector<double> kLambdas = {0.1, 0.2, 0.3, 0.4};
  return kLambdas;
}

// Interpolated maximum-likelihood n-gram model:
//
//   p(w | ctx) = (l0 / V + sum_j lj * c_j(ctx_j, w) / c_j(ctx_j)) / Z
//
// where j runs over the orders whose (j-1)-token context is present in the
// training counts and Z = l0 + sum of those lj. With every context seen this
// is the textbook interpolation; l0 > 0 keeps every probability positive.
class InterpolatedNgramLm final : public LanguageModel {
 public:
  struct ContextCounts {
    std::uint64_t total = 0;
    // Sorted by token id.
    std::vector<std::pair<TokenId, std::uint64_t>> next;

    friend bool operator==(const ContextCounts&, const ContextCounts&) =
        default;
  };
  using Table = std::map<std::vector<TokenId>, ContextCounts>;

  static absl::Status ValidateParameters(int order,
                                         const std::vector<double>& lambdas) {
    if (order < 1) return absl::InvalidArgumentError("order must be >= 1");
    if (lambdas.size() != static_cast<std::size_t>(order) + 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "expected ", order + 1, " interpolation weights, got ",
          lambdas.size()));
    }
    double sum = 0.0;
    for (double l : lambdas) {
      if (!std::isfinite(l) || l < 0.0) {
        return absl::InvalidArgumentError(
            "interpolation weights must be finite and non-negative");
      }
      sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      return absl::InvalidArgumentError(
          absl::StrCat("interpolation weights sum to ", sum, ", not 1"));
    }
    if (lambdas[0] <= 0.0) {
      return absl::InvalidArgumentError(
          "the uniform weight must be positive");
    }
    return absl::OkStatus();
  }

  static absl::StatusOr<InterpolatedNgramLm> Create(
      int order, std::vector<double> lambdas, std::size_t vocab_size) {
    LEAKAUDIT_RETURN_IF_ERROR(ValidateParameters(order, lambdas));
    if (vocab_size == 0) {
      return absl::InvalidArgumentError("vocab_size must be positive");
    }
    return InterpolatedNgramLm(order, std::move(lambdas), vocab_size);
  }

  int order() const { return order_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  const std::vector<Table>& tables() const { return tables_; }

  double Probability(std::span<const TokenId> context, TokenId token) const {
    double p = Uniform();
    double z = lambdas_[0];
    for (int j = 1; j <= order_; ++j) {
      const ContextCounts* cc = Find(context, j);
      if (cc == nullptr) continue;
      z += lambdas_[j];
      auto it = std::lower_bound(
          cc->next.begin(), cc->next.end(), token,
          [](const auto& e, TokenId t) { return e.first < t; });
      if (it != cc->next.end() && it->first == token) {
        p += Term(lambdas_[j], it->second, cc->total);
      }
    }
    return p / z;
  }

  // Same arithmetic as Probability, applied to every token.
  std::vector<double> Distribution(std::span<const TokenId> context) const {
    std::vector<double> v(vocab_size_, Uniform());
    double z = lambdas_[0];
    for (int j = 1; j <= order_; ++j) {
      const ContextCounts* cc = Find(context, j);
      if (cc == nullptr) continue;
      z += lambdas_[j];
      for (const auto& [tok, c] : cc->next) {
        v[tok] += Term(lambdas_[j], c, cc->total);
      }
    }
    for (double& x : v) x /= z;
    return v;
  }

  absl::StatusOr<std::vector<double>> NextDistribution(
      std::span<const TokenId> context) const override {
    return Distribution(context);
  }

  absl::StatusOr<double> LogProb(std::span<const TokenId> context,
                                 TokenId token) const override {
    if (token >= vocab_size_) {
      return absl::OutOfRangeError(absl::StrCat("token id ", token));
    }
    return std::log(Probability(context, token));
  }

  // Accumulates every j-gram (1 <= j <= order) inside one document.
  absl::Status AddDocument(std::span<const TokenId> doc) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i] >= vocab_size_) {
        return absl::OutOfRangeError(
            absl::StrCat("token id ", doc[i], " >= vocab size ", vocab_size_));
      }
      for (int j = 1; j <= order_ && static_cast<std::size_t>(j) <= i + 1;
           ++j) {
        std::vector<TokenId> ctx(doc.begin() + (i + 1 - j), doc.begin() + i);
        ContextCounts& cc = tables_[j - 1][std::move(ctx)];
        ++cc.total;
        auto it = std::lower_bound(
            cc.next.begin(), cc.next.end(), doc[i],
            [](const auto& e, TokenId t) { return e.first < t; });
        if (it != cc.next.end() && it->first == doc[i]) {
          ++it->second;
        } else {
          cc.next.insert(it, {doc[i], 1});
        }
      }
    }
    return absl::OkStatus();
  }

  void Save(std::ostream& out) const {
    nlohmann::json j;
    j["format"] = "leakaudit-ngram";
    j["format_version"] = 1;
    j["tool_version"] = kToolVersion;
    j["order"] = order_;
    j["vocab_size"] = vocab_size_;
    j["lambdas"] = lambdas_;
    nlohmann::json tables = nlohmann::json::array();
    for (const Table& t : tables_) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& [ctx, cc] : t) {
        nlohmann::json next = nlohmann::json::array();
        for (const auto& [tok, c] : cc.next) next.push_back({tok, c});
        rows.push_back({{"context", ctx}, {"total", cc.total}, {"next", next}});
      }
      tables.push_back(std::move(rows));
    }
    j["tables"] = std::move(tables);
    out << j.dump() << '\n';
  }

  static absl::StatusOr<InterpolatedNgramLm> Load(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      return absl::InvalidArgumentError("model file is not valid JSON");
    }
    if (j.value("format", "") != "leakaudit-ngram" ||
        j.value("format_version", 0) != 1) {
      return absl::InvalidArgumentError("unsupported model format");
    }
    try {
      const int order = j.at("order").get<int>();
      auto lambdas = j.at("lambdas").get<std::vector<double>>();
      const auto vocab_size = j.at("vocab_size").get<std::size_t>();
      LEAKAUDIT_ASSIGN_OR_RETURN(auto model,
                                 Create(order, std::move(lambdas), vocab_size));
      const auto& tables = j.at("tables");
      if (!tables.is_array() ||
          tables.size() != static_cast<std::size_t>(order)) {
        return absl::InvalidArgumentError("model table count mismatch");
      }
      for (int k = 0; k < order; ++k) {
        for (const auto& row : tables[k]) {
          auto ctx = row.at("context").get<std::vector<TokenId>>();
          if (ctx.size() != static_cast<std::size_t>(k)) {
            return absl::InvalidArgumentError("model context length mismatch");
          }
          for (TokenId t : ctx) {
            if (t >= vocab_size) {
              return absl::InvalidArgumentError("context token out of range");
            }
          }
          ContextCounts cc;
          cc.total = row.at("total").get<std::uint64_t>();
          std::uint64_t sum = 0;
          for (const auto& e : row.at("next")) {
            const auto tok = e.at(0).get<TokenId>();
            const auto c = e.at(1).get<std::uint64_t>();
            if (tok >= vocab_size || c == 0 ||
                (!cc.next.empty() && cc.next.back().first >= tok)) {
              return absl::InvalidArgumentError("malformed model count table");
            }
            cc.next.emplace_back(tok, c);
            sum += c;
          }
          if (sum != cc.total || cc.total == 0) {
            return absl::InvalidArgumentError("model count totals inconsistent");
          }
          model.tables_[k].emplace(std::move(ctx), std::move(cc));
        }
      }
      return model;
    } catch (const nlohmann::json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed model file: ", e.what()));
    }
  }

  friend bool operator==(const InterpolatedNgramLm& a,
                         const InterpolatedNgramLm& b) {
    return a.order_ == b.order_ && a.lambdas_ == b.lambdas_ &&
           a.vocab_size_ == b.vocab_size_ && a.tables_ == b.tables_;
  }

 private:
  InterpolatedNgramLm(int order, std::vector<double> lambdas,
                      std::size_t vocab_size)
      : order_(order),
        lambdas_(std::move(lambdas)),
        vocab_size_(vocab_size),
        tables_(static_cast<std::size_t>(order)) {}

  double Uniform() const {
    return lambdas_[0] / static_cast<double>(vocab_size_);
  }

  static double Term(double lambda, std::uint64_t count, std::uint64_t total) {
    return lambda * static_cast<double>(count) / static_cast<double>(total);
  }

  // Counts for the order-j context (last j-1 tokens), or null when the
  // context is too short or unseen.
  const ContextCounts* Find(std::span<const TokenId> context, int j) const {
    const auto need = static_cast<std::size_t>(j - 1);
    if (context.size() < need) return nullptr;
    std::vector<TokenId> key(context.end() - need, context.end());
    const Table& t = tables_[j - 1];
    auto it = t.find(key);
    return it == t.end() || it->second.total == 0 ? nullptr : &it->second;
  }

  int order_;
  std::vector<double> lambdas_;
  std::size_t vocab_size_;
  std::vector<Table> tables_;
};

inline absl::StatusOr<InterpolatedNgramLm> TrainNgram(
    const BasicCorpus<TokenId>& corpus, std::size_t vocab_size, int order,
    std::vector<double> lambdas) {
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto model,
      InterpolatedNgramLm::Create(order, std::move(lambdas), vocab_size));
  for (const auto& d : corpus.documents()) {
    LEAKAUDIT_RETURN_IF_ERROR(model.AddDocument(d.tokens));
  }
  return model;
}

inline absl::StatusOr<InterpolatedNgramLm> TrainNgram(
    const EncodedCorpus& corpus, int order = kDefaultNgramOrder,
    std::vector<double> lambdas = DefaultNgramLambdas()) {
  return TrainNgram(corpus, corpus.vocab().size(), order, std::move(lambdas));
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_NGRAM_MODEL_H_
