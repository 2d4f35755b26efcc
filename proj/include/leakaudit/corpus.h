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

// User-keyed training corpora: ingestion, tokenization, vocabularies and the
// corpus transforms (dedup, user exclusion) used before auditing a model.

#ifndef LEAKAUDIT_CORPUS_H_
#define LEAKAUDIT_CORPUS_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/hash/hash.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "json.hpp"
#include "leakaudit/status_macros.h"

namespace leakaudit {

using TokenId = std::uint32_t;

inline constexpr std::string_view kUnkToken = "<unk>";

template <typename Token>
struct BasicDocument {
  std::string user_id;
  std::string doc_id;
  std::vector<Token> tokens;

  friend bool operator==(const BasicDocument&, const BasicDocument&) = default;
};

using UserDocument = BasicDocument<std::string>;
using EncodedDocument = BasicDocument<TokenId>;

// Documents keyed by (user_id, doc_id), kept in ingestion order.
template <typename Token>
class BasicCorpus {
 public:
  using Document = BasicDocument<Token>;

  // Fails on a duplicate (user_id, doc_id).
  absl::Status Add(Document doc) {
    auto key = std::make_pair(doc.user_id, doc.doc_id);
    if (!keys_.insert(key).second) {
      return absl::AlreadyExistsError(
          absl::StrCat("duplicate document (user_id=", doc.user_id,
                       ", doc_id=", doc.doc_id, ")"));
    }
    auto [it, inserted] = user_index_.try_emplace(doc.user_id);
    if (inserted) users_.push_back(doc.user_id);
    it->second.push_back(documents_.size());
    documents_.push_back(std::move(doc));
    return absl::OkStatus();
  }

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  // Users in order of first appearance.
  const std::vector<std::string>& users() const { return users_; }
  const std::map<std::string, std::vector<std::size_t>>& user_index() const {
    return user_index_;
  }

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& d : documents_) n += d.tokens.size();
    return n;
  }

  BasicCorpus EmptyLike() const { return BasicCorpus(); }

  friend bool operator==(const BasicCorpus& a, const BasicCorpus& b) {
    return a.documents_ == b.documents_;
  }

 private:
  std::vector<Document> documents_;
  std::map<std::string, std::vector<std::size_t>> user_index_;
  std::vector<std::string> users_;
  std::set<std::pair<std::string, std::string>> keys_;
};

using Corpus = BasicCorpus<std::string>;

// Dense token ids 0..V-1 with the UNK literal always last.
namespace internal {
inline bool HasWhitespace(std::string_view s);
}  // namespace internal

class Vocabulary {
 public:
  // `tokens` must be distinct and must not contain the UNK literal.
  static absl::StatusOr<Vocabulary> FromTokens(std::vector<std::string> tokens) {
    Vocabulary v;
    for (auto& t : tokens) {
      if (t == kUnkToken) {
        return absl::InvalidArgumentError(
            "vocabulary tokens must not include the UNK literal");
      }
      if (t.empty()) {
        return absl::InvalidArgumentError("empty vocabulary token");
      }
      // Tokens come from whitespace splitting; anything else can never match.
      if (internal::HasWhitespace(t)) {
        return absl::InvalidArgumentError(
            absl::StrCat("vocabulary token contains whitespace: \"", t, "\""));
      }
      const auto id = static_cast<TokenId>(v.tokens_.size());
      if (!v.id_of_.emplace(t, id).second) {
        return absl::InvalidArgumentError(
            absl::StrCat("duplicate vocabulary token: ", t));
      }
      v.tokens_.push_back(std::move(t));
    }
    v.unk_id_ = static_cast<TokenId>(v.tokens_.size());
    v.tokens_.emplace_back(kUnkToken);
    v.id_of_.emplace(std::string(kUnkToken), v.unk_id_);
    return v;
  }

  TokenId Lookup(absl::string_view token) const {
    auto it = id_of_.find(token);
    return it == id_of_.end() ? unk_id_ : it->second;
  }
  bool Contains(absl::string_view token) const { return id_of_.contains(token); }
  const std::string& Token(TokenId id) const { return tokens_.at(id); }

  TokenId unk_id() const { return unk_id_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One token per line in id order, UNK last.
  void Save(std::ostream& out) const {
    for (const auto& t : tokens_) out << t << '\n';
  }

  static absl::StatusOr<Vocabulary> Load(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
    if (lines.empty() || lines.back() != kUnkToken) {
      return absl::InvalidArgumentError(
          "vocabulary file must end with the UNK line");
    }
    lines.pop_back();
    return FromTokens(std::move(lines));
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  Vocabulary() = default;

  std::vector<std::string> tokens_;
  absl::flat_hash_map<std::string, TokenId> id_of_;
  TokenId unk_id_ = 0;
};

class EncodedCorpus : public BasicCorpus<TokenId> {
 public:
  explicit EncodedCorpus(std::shared_ptr<const Vocabulary> vocab)
      : vocab_(std::move(vocab)) {}

  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }

  EncodedCorpus EmptyLike() const { return EncodedCorpus(vocab_); }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
};

namespace internal {

// Decodes one UTF-8 code point at `pos`; returns its length (1 on malformed
// input so scanning always advances).
inline std::size_t Utf8Decode(std::string_view s, std::size_t pos,
                              char32_t* cp) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    *cp = b0;
    return 1;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      *cp = (char32_t{b0 & 0x1Fu} << 6) | static_cast<char32_t>(c1);
      return 2;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      *cp = (char32_t{b0 & 0x0Fu} << 12) | (static_cast<char32_t>(c1) << 6) |
            static_cast<char32_t>(c2);
      return 3;
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      *cp = (char32_t{b0 & 0x07u} << 18) | (static_cast<char32_t>(c1) << 12) |
            (static_cast<char32_t>(c2) << 6) | static_cast<char32_t>(c3);
      return 4;
    }
  }
  *cp = 0xFFFD;
  return 1;
}

inline bool IsUnicodeSpace(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

inline bool IsPunct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && ((u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) ||
                      (u >= 0x5B && u <= 0x60) || (u >= 0x7B && u <= 0x7E));
}

inline bool HasWhitespace(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    char32_t cp;
    const std::size_t n = Utf8Decode(s, i, &cp);
    if (IsUnicodeSpace(cp)) return true;
    i += n;
  }
  return false;
}

}  // namespace internal

// Splits on Unicode whitespace, then peels leading and trailing ASCII
// punctuation off each word as single-character tokens. Inner punctuation
// ("don't") stays attached.
inline std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  auto emit_word = [&out](std::string_view w) {
    std::size_t lo = 0, hi = w.size();
    while (lo < hi && internal::IsPunct(w[lo])) ++lo;
    for (std::size_t i = 0; i < lo; ++i) out.emplace_back(1, w[i]);
    if (lo == hi) return;
    while (hi > lo && internal::IsPunct(w[hi - 1])) --hi;
    out.emplace_back(w.substr(lo, hi - lo));
    for (std::size_t i = hi; i < w.size(); ++i) out.emplace_back(1, w[i]);
  };
  std::size_t start = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size();) {
    char32_t cp;
    const std::size_t n = internal::Utf8Decode(text, i, &cp);
    if (internal::IsUnicodeSpace(cp)) {
      if (in_word) emit_word(text.substr(start, i - start));
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      start = i;
    }
    i += n;
  }
  if (in_word) emit_word(text.substr(start));
  return out;
}

struct IngestResult {
  Corpus corpus;
  // Records whose token sequence was empty after tokenization.
  std::size_t dropped_empty = 0;
};

// Reads line-delimited JSON records {user_id, doc_id?, text | tokens}.
// Blank lines are skipped. Missing doc_ids are assigned the per-user record
// ordinal ("0", "1", ...).
inline absl::StatusOr<IngestResult> Ingest(std::istream& in) {
  IngestResult result;
  std::map<std::string, std::size_t> ordinal;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    auto bad = [line_no](absl::string_view what) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", what));
    };
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) return bad("not a JSON object");
    auto uid = rec.find("user_id");
    if (uid == rec.end() || !uid->is_string() ||
        uid->get_ref<const std::string&>().empty()) {
      return bad("missing or invalid user_id");
    }
    UserDocument doc;
    doc.user_id = uid->get<std::string>();
    const std::size_t ord = ordinal[doc.user_id]++;
    if (auto did = rec.find("doc_id"); did != rec.end()) {
      if (!did->is_string()) return bad("doc_id must be a string");
      doc.doc_id = did->get<std::string>();
    } else {
      doc.doc_id = std::to_string(ord);
    }
    const auto text = rec.find("text");
    const auto toks = rec.find("tokens");
    if ((text == rec.end()) == (toks == rec.end())) {
      return bad("exactly one of text or tokens is required");
    }
    if (text != rec.end()) {
      if (!text->is_string()) return bad("text must be a string");
      doc.tokens = Tokenize(text->get_ref<const std::string&>());
    } else {
      if (!toks->is_array()) return bad("tokens must be an array");
      for (const auto& t : *toks) {
        if (!t.is_string()) return bad("tokens must be strings");
        const auto& s = t.get_ref<const std::string&>();
        if (s.empty() || internal::HasWhitespace(s)) {
          return bad("tokens must be non-empty and whitespace-free");
        }
        doc.tokens.push_back(s);
      }
    }
    if (doc.tokens.empty()) {
      ++result.dropped_empty;
      continue;
    }
    if (auto s = result.corpus.Add(std::move(doc)); !s.ok()) {
      return bad(s.message());
    }
  }
  return result;
}

namespace internal {

inline absl::StatusOr<Vocabulary> RankedVocabulary(
    std::vector<std::pair<std::string, std::size_t>> scored,
    std::size_t limit) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > limit) scored.resize(limit);
  std::vector<std::string> tokens;
  tokens.reserve(scored.size());
  for (auto& [t, c] : scored) tokens.push_back(std::move(t));
  return Vocabulary::FromTokens(std::move(tokens));
}

}  // namespace internal

// The k most frequent tokens (ties broken lexicographically) plus UNK.
inline absl::StatusOr<Vocabulary> BuildVocabTopK(const Corpus& corpus,
                                                 std::size_t k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  absl::flat_hash_map<std::string, std::size_t> counts;
  for (const auto& d : corpus.documents()) {
    for (const auto& t : d.tokens) {
      if (t != kUnkToken) ++counts[t];
    }
  }
  return internal::RankedVocabulary({counts.begin(), counts.end()}, k);
}

// Tokens used by at least m distinct users, plus UNK.
inline absl::StatusOr<Vocabulary> BuildVocabUserThreshold(const Corpus& corpus,
                                                          std::size_t m) {
  if (m < 1) return absl::InvalidArgumentError("m must be >= 1");
  absl::flat_hash_map<std::string, std::size_t> user_counts;
  for (const auto& [user, doc_indices] : corpus.user_index()) {
    absl::flat_hash_set<std::string_view> seen;
    for (std::size_t i : doc_indices) {
      for (const auto& t : corpus.documents()[i].tokens) {
        if (t != kUnkToken && seen.insert(t).second) ++user_counts[t];
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [t, c] : user_counts) {
    if (c >= m) kept.emplace_back(t, c);
  }
  const std::size_t n = kept.size();
  return internal::RankedVocabulary(std::move(kept), n);
}

inline EncodedCorpus Encode(const Corpus& corpus,
                            std::shared_ptr<const Vocabulary> vocab) {
  EncodedCorpus out(vocab);
  for (const auto& d : corpus.documents()) {
    EncodedDocument e{d.user_id, d.doc_id, {}};
    e.tokens.reserve(d.tokens.size());
    for (const auto& t : d.tokens) e.tokens.push_back(vocab->Lookup(t));
    out.Add(std::move(e)).IgnoreError();  // keys are unique in `corpus`
  }
  return out;
}

inline Corpus Decode(const EncodedCorpus& corpus) {
  Corpus out;
  for (const auto& d : corpus.documents()) {
    UserDocument u{d.user_id, d.doc_id, {}};
    for (TokenId t : d.tokens) u.tokens.push_back(corpus.vocab().Token(t));
    out.Add(std::move(u)).IgnoreError();
  }
  return out;
}

template <typename CorpusT>
struct DedupResult {
  CorpusT corpus;
  std::size_t removed = 0;
};

// Drops documents whose token sequence already appeared earlier in the corpus.
template <typename CorpusT>
DedupResult<CorpusT> DedupSentences(const CorpusT& corpus) {
  DedupResult<CorpusT> result{corpus.EmptyLike(), 0};
  using Token = typename std::decay_t<
      decltype(corpus.documents().front().tokens)>::value_type;
  absl::flat_hash_set<std::vector<Token>> seen;
  for (const auto& d : corpus.documents()) {
    if (!seen.insert(d.tokens).second) {
      ++result.removed;
      continue;
    }
    result.corpus.Add(d).IgnoreError();
  }
  return result;
}

// Keeps exactly the documents of users not in `users`; unknown ids ignored.
template <typename CorpusT>
CorpusT ExcludeUsers(const CorpusT& corpus, const std::set<std::string>& users) {
  CorpusT out = corpus.EmptyLike();
  for (const auto& d : corpus.documents()) {
    if (!users.contains(d.user_id)) out.Add(d).IgnoreError();
  }
  return out;
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_CORPUS_H_
