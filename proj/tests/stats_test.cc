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

#include "leakaudit/stats.h"

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "leakaudit/aho_corasick.h"
#include "leakaudit/ngram_model.h"
#include "test_util.h"

namespace leakaudit {
namespace {

using ::leakaudit::testing::Doc;
using ::leakaudit::testing::Ids;
using ::leakaudit::testing::MakeVeryMuchFixture;
using ::leakaudit::testing::MakeVocab;
using ::leakaudit::testing::NaiveCounts;
using ::leakaudit::testing::RandomCorpusSpec;
using ::leakaudit::testing::RandomEncodedCorpus;
using ::leakaudit::testing::RowInvariantsHold;
using ::leakaudit::testing::Words;
using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

TEST(AhoCorasickTest, FindsOverlappingAndNestedMatches) {
  const std::vector<std::vector<char>> pats = {{'a', 'a'}, {'a'}, {'b', 'a', 'a'}};
  auto ac = AhoCorasick<char>::Build(pats);
  ASSERT_TRUE(ac.ok());
  const std::string text = "baaa";
  std::multiset<std::pair<std::size_t, std::size_t>> hits;
  ac->Scan(std::span<const char>(text.data(), text.size()),
           [&](std::size_t p, std::size_t end) { hits.insert({p, end}); });
  EXPECT_EQ(hits, (std::multiset<std::pair<std::size_t, std::size_t>>{
                      {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}}));
}

TEST(AhoCorasickTest, RejectsEmptyPattern) {
  const std::vector<std::vector<int>> pats = {{1}, {}};
  EXPECT_FALSE(AhoCorasick<int>::Build(pats).ok());
}

TEST(AhoCorasickTest, DuplicatePatternsBothReported) {
  const std::vector<std::vector<int>> pats = {{1, 2}, {1, 2}};
  auto ac = AhoCorasick<int>::Build(pats);
  ASSERT_TRUE(ac.ok());
  const std::vector<int> text = {1, 2, 1, 2};
  std::vector<std::size_t> count(2);
  ac->Scan(text, [&](std::size_t p, std::size_t) { ++count[p]; });
  EXPECT_THAT(count, ElementsAre(2, 2));
}

TEST(CountInCorpusTest, OverlapsCounted) {
  auto v = MakeVocab(Words("a b"));
  Corpus c;
  ASSERT_TRUE(c.Add(Doc("u", "1", "a a a")).ok());
  auto e = Encode(c, v);
  auto counts = CountInCorpus(std::vector<std::vector<TokenId>>{Ids(*v, "a a"), Ids(*v, "b")}, e);
  ASSERT_TRUE(counts.ok());
  EXPECT_THAT(*counts, ElementsAre(CorpusCounts{2, 1}, CorpusCounts{0, 0}));
}

TEST(CountInCorpusTest, NeverAcrossDocuments) {
  auto v = MakeVocab(Words("a b"));
  Corpus c;
  ASSERT_TRUE(c.Add(Doc("u", "1", "a")).ok());
  ASSERT_TRUE(c.Add(Doc("u", "2", "b")).ok());
  auto counts = CountInCorpus(std::vector<std::vector<TokenId>>{Ids(*v, "a b")}, Encode(c, v));
  ASSERT_TRUE(counts.ok());
  EXPECT_EQ((*counts)[0], (CorpusCounts{0, 0}));
}

TEST(CountInCorpusTest, NoPatterns) {
  auto v = MakeVocab(Words("a"));
  Corpus c;
  ASSERT_TRUE(c.Add(Doc("u", "1", "a")).ok());
  auto counts = CountInCorpus({}, Encode(c, v));
  ASSERT_TRUE(counts.ok());
  EXPECT_TRUE(counts->empty());
}

TEST(CountInCorpusTest, MatchesSlidingWindowOracle) {
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    auto corpus = RandomEncodedCorpus(
        rng, {.max_docs = 40, .max_len = 100, .max_vocab = 4, .max_users = 8});
    std::vector<std::vector<TokenId>> patterns(1 + rng() % 100);
    for (auto& p : patterns) {
      p.resize(1 + rng() % 4);
      for (auto& t : p) t = static_cast<TokenId>(rng() % corpus.vocab().size());
    }
    auto counts = CountInCorpus(patterns, corpus);
    ASSERT_TRUE(counts.ok());
    EXPECT_EQ(*counts, NaiveCounts(patterns, corpus));
  }
}

TEST(AggregateRunsTest, EmptyIsEmpty) { EXPECT_TRUE(AggregateRuns({}).empty()); }

TEST(AggregateRunsTest, MatchesGroupingOracle) {
  std::mt19937_64 rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    RunMultiset runs;
    for (int i = 0; i < static_cast<int>(rng() % 30); ++i) {
      leakaudit::Run r;
      r.user_id = absl::StrCat("u", rng() % 4);
      r.doc_id = absl::StrCat(i);
      r.start_pos = 1 + rng() % 3;
      r.tokens.resize(1 + rng() % 2);
      for (auto& t : r.tokens) t = static_cast<TokenId>(rng() % 3);
      r.context_tokens.assign(r.start_pos, 0);
      r.token_log_probs.assign(r.tokens.size(), -0.5);
      runs.push_back(r);
    }
    SortRuns(runs);
    std::map<std::vector<TokenId>, std::pair<int, std::set<std::string>>> oracle;
    for (const auto& r : runs) {
      ++oracle[r.tokens].first;
      oracle[r.tokens].second.insert(r.user_id);
    }
    const auto groups = AggregateRuns(runs);
    ASSERT_EQ(groups.size(), oracle.size());
    std::size_t total = 0;
    for (const auto& g : groups) {
      const auto& [n, users] = oracle.at(g.sequence);
      EXPECT_EQ(g.total_in_s, n);
      EXPECT_EQ(g.user_in_s, users.size());
      EXPECT_EQ(g.contexts.size(), n);
      EXPECT_EQ(g.owners, std::vector<std::string>(users.begin(), users.end()));
      total += g.total_in_s;
    }
    EXPECT_EQ(total, runs.size());
  }
}

TEST(BuildReportTest, VeryMuchRow) {
  auto f = MakeVeryMuchFixture();
  auto runs = ExtractRuns(*f.model, *f.corpus, {});
  ASSERT_TRUE(runs.ok());
  auto report = BuildReport(*runs, *f.corpus, *f.model, /*redact=*/false);
  ASSERT_TRUE(report.ok()) << report.status();
  ASSERT_EQ(report->rows.size(), 1);
  const ReportRow& r = report->rows[0];
  EXPECT_THAT(r.sequence, ElementsAre("very", "much"));
  EXPECT_EQ(r.total_in_s, 2);
  EXPECT_EQ(r.user_in_s, 1);
  EXPECT_EQ(r.total_in_d, 10);
  EXPECT_EQ(r.user_in_d, 5);
  ASSERT_EQ(r.contexts.size(), 2);
  EXPECT_THAT(r.contexts[0], ElementsAre("Thank", "you"));
  EXPECT_THAT(r.contexts[1], ElementsAre("I", "like", "cats"));
  EXPECT_THAT(r.perplexities,
              Pointwise(DoubleNear(1e-12), {f.pp_thank_you, f.pp_cats}));
  EXPECT_THAT(r.owners, ElementsAre("u1"));
}

TEST(BuildReportTest, VeryMuchRedacted) {
  auto f = MakeVeryMuchFixture();
  auto runs = ExtractRuns(*f.model, *f.corpus, {});
  ASSERT_TRUE(runs.ok());
  auto plain = BuildReport(*runs, *f.corpus, *f.model, false);
  auto report = BuildReport(*runs, *f.corpus, *f.model, true);
  ASSERT_TRUE(report.ok() && plain.ok());
  EXPECT_TRUE(report->redacted);
  const ReportRow& r = report->rows[0];
  EXPECT_TRUE(r.sequence.empty());
  EXPECT_TRUE(r.contexts.empty());
  EXPECT_TRUE(r.owners.empty());
  EXPECT_EQ(r.sequence_length, 2);
  EXPECT_THAT(r.context_lengths, ElementsAre(2, 3));
  const ReportRow& p = plain->rows[0];
  EXPECT_EQ(r.total_in_s, p.total_in_s);
  EXPECT_EQ(r.user_in_s, p.user_in_s);
  EXPECT_EQ(r.total_in_d, p.total_in_d);
  EXPECT_EQ(r.user_in_d, p.user_in_d);
  EXPECT_EQ(r.perplexities, p.perplexities);
}

TEST(BuildReportTest, OrderingLongestFirstThenLexicographic) {
  auto v = MakeVocab(Words("a b c"));
  EncodedCorpus corpus(v);
  ASSERT_TRUE(corpus.Add({"u", "1", Ids(*v, "a b c a c b a")}).ok());
  RunMultiset runs;
  auto run = [&](std::size_t start, const std::string& toks) {
    leakaudit::Run r{"u", "1", start, Ids(*v, toks), {}, {}};
    r.context_tokens.assign(corpus.documents()[0].tokens.begin(),
                            corpus.documents()[0].tokens.begin() + start);
    r.token_log_probs.assign(r.tokens.size(), -1.0);
    return r;
  };
  runs = {run(1, "b"), run(2, "c a"), run(4, "c"), run(5, "b a")};
  auto m = InterpolatedNgramLm::Create(1, {1, 0}, v->size());
  auto report = BuildReport(runs, corpus, *m, false);
  ASSERT_TRUE(report.ok());
  std::vector<std::string> seqs;
  for (const auto& r : report->rows) seqs.push_back(absl::StrJoin(r.sequence, " "));
  EXPECT_THAT(seqs, ElementsAre("b a", "c a", "b", "c"));
}

TEST(BuildReportTest, InvariantsOnRandomCorpora) {
  std::mt19937_64 rng(43);
  std::size_t violations = 0, rows = 0;
  for (int iter = 0; iter < 150; ++iter) {
    auto corpus = RandomEncodedCorpus(rng, {});
    auto model = TrainNgram(corpus);
    ASSERT_TRUE(model.ok());
    auto runs = ExtractRuns(*model, corpus, {.k = 1 + rng() % 3 % model->vocab_size()});
    ASSERT_TRUE(runs.ok());
    auto report = BuildReport(*runs, corpus, *model, false);
    ASSERT_TRUE(report.ok());
    std::uint64_t total_s = 0;
    std::set<std::vector<std::string>> seen;
    for (const auto& r : report->rows) {
      ++rows;
      violations += !RowInvariantsHold(r);
      EXPECT_TRUE(ValidateRow(r).ok());
      EXPECT_TRUE(seen.insert(r.sequence).second);
      total_s += r.total_in_s;
    }
    EXPECT_EQ(total_s, runs->size());
  }
  EXPECT_EQ(violations, 0);
  EXPECT_GT(rows, 0);
}

ReportRow CountsRow(std::string seq, std::uint64_t total_d, std::uint64_t user_d) {
  ReportRow r;
  r.sequence = Words(seq);
  r.sequence_length = r.sequence.size();
  r.total_in_s = 1;
  r.user_in_s = 1;
  r.total_in_d = total_d;
  r.user_in_d = user_d;
  r.contexts = {{"ctx"}};
  r.context_lengths = {1};
  r.perplexities = {2.0};
  r.owners = {"u"};
  return r;
}

TEST(FilterTest, UniqueAndSingletonRules) {
  LeakageReport report;
  report.rows = {CountsRow("a", 10, 5), CountsRow("b", 2, 1), CountsRow("c", 1, 1)};
  auto uniq = FilterUnique(report);
  ASSERT_EQ(uniq.rows.size(), 2);
  EXPECT_THAT(uniq.rows[0].sequence, ElementsAre("b"));
  auto single = FilterSingleton(report);
  ASSERT_EQ(single.rows.size(), 1);
  EXPECT_THAT(single.rows[0].sequence, ElementsAre("c"));
}

TEST(FilterTest, FiveSingletonRowsAllRetained) {
  LeakageReport report;
  for (const char* s : {"way , I don't think it is", "the time , I would be",
                        "same thing , I would be", "media ) is not",
                        "not be ) but"}) {
    report.rows.push_back(CountsRow(s, 1, 1));
  }
  EXPECT_EQ(FilterUnique(report).rows, report.rows);
  EXPECT_EQ(FilterSingleton(report).rows, report.rows);
}

TEST(FilterTest, SingletonSubsetOfUnique) {
  std::mt19937_64 rng(44);
  for (int iter = 0; iter < 100; ++iter) {
    auto corpus = RandomEncodedCorpus(rng, {});
    auto model = TrainNgram(corpus);
    auto runs = ExtractRuns(*model, corpus, {});
    auto report = BuildReport(*runs, corpus, *model, false);
    ASSERT_TRUE(report.ok());
    const auto uniq = FilterUnique(*report);
    for (const auto& r : FilterSingleton(*report).rows) {
      EXPECT_NE(std::find(uniq.rows.begin(), uniq.rows.end(), r), uniq.rows.end());
    }
  }
}

}  // namespace
}  // namespace leakaudit
