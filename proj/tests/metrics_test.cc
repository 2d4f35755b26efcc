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

#include "leakaudit/metrics.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "leakaudit/ngram_model.h"
#include "leakaudit/perplexity.h"
#include "test_util.h"

namespace leakaudit {
namespace {

using ::leakaudit::testing::Doc;
using ::leakaudit::testing::Ids;
using ::leakaudit::testing::kReferenceEpsilon;
using ::leakaudit::testing::MakeReferenceEpsilonFixture;
using ::leakaudit::testing::MakeVocab;
using ::leakaudit::testing::ReferencePairs;
using ::leakaudit::testing::ScriptedModel;
using ::leakaudit::testing::Words;
using ::testing::HasSubstr;

std::vector<PerplexityPair> ReferenceAsPairs() {
  std::vector<PerplexityPair> out;
  for (const auto& p : ReferencePairs()) {
    out.push_back({p.sequence, p.pp_lm, p.pp_public});
  }
  return out;
}

TEST(EpsilonTest, ReferencePairs) {
  auto r = EpsilonFromPerplexities(ReferenceAsPairs());
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r->per_sequence.size(), ReferencePairs().size());
  for (std::size_t i = 0; i < ReferencePairs().size(); ++i) {
    EXPECT_NEAR(r->per_sequence[i].log_ratio, ReferencePairs()[i].log_ratio,
                0.005)
        << ReferencePairs()[i].sequence;
    EXPECT_NEAR(r->per_sequence[i].log_ratio,
                std::log(ReferencePairs()[i].pp_public / ReferencePairs()[i].pp_lm),
                1e-9);
  }
  ASSERT_TRUE(r->epsilon_l.has_value());
  EXPECT_NEAR(*r->epsilon_l, kReferenceEpsilon, 0.005);
  EXPECT_EQ(DisplayFixed2(*r->epsilon_l), "0.64");
}

TEST(EpsilonTest, SingleRows) {
  const std::vector<PerplexityPair> a = {{"Wars ) is", 3.53, 6.69}};
  EXPECT_NEAR(*EpsilonFromPerplexities(a)->epsilon_l, 0.64, 0.005);
  const std::vector<PerplexityPair> b = {{"want * to be ?", 4.17, 3.63}};
  EXPECT_NEAR(*EpsilonFromPerplexities(b)->epsilon_l, -0.14, 0.005);
}

TEST(EpsilonTest, EmptyIsAbsent) {
  auto r = EpsilonFromPerplexities({});
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->epsilon_l.has_value());
  EXPECT_TRUE(EpsilonToJson(*r)["epsilon_l"].is_null());
  EXPECT_EQ(EpsilonToJson(*r)["epsilon_l_display"], "-");
  EXPECT_THAT(RenderEpsilonTable(*r), HasSubstr("epsilon_l\t-"));
}

TEST(EpsilonTest, RejectsNonPositive) {
  const std::vector<PerplexityPair> bad = {{"x", 0.0, 1.0}};
  EXPECT_FALSE(EpsilonFromPerplexities(bad).ok());
  const std::vector<PerplexityPair> inf = {{"x", 1.0, HUGE_VAL}};
  EXPECT_FALSE(EpsilonFromPerplexities(inf).ok());
}

TEST(EpsilonTest, ScalePermutationAndMaxMonotonicity) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> pp(1.0, 50.0);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<PerplexityPair> pairs(1 + rng() % 20);
    for (auto& p : pairs) p = {"s", pp(rng), pp(rng)};
    auto base = EpsilonFromPerplexities(pairs);
    ASSERT_TRUE(base.ok());
    double fold = -HUGE_VAL;
    for (const auto& r : base->per_sequence) fold = std::max(fold, r.log_ratio);
    EXPECT_EQ(*base->epsilon_l, fold);

    const double x = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    auto scaled = pairs;
    for (auto& p : scaled) {
      p.pp_lm *= x;
      p.pp_public *= x;
    }
    auto s = EpsilonFromPerplexities(scaled);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EXPECT_NEAR(s->per_sequence[i].log_ratio, base->per_sequence[i].log_ratio,
                  1e-9);
    }

    auto shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(*EpsilonFromPerplexities(shuffled)->epsilon_l, *base->epsilon_l);

    auto more = pairs;
    more.push_back({"t", pp(rng), pp(rng)});
    EXPECT_GE(*EpsilonFromPerplexities(more)->epsilon_l, *base->epsilon_l);
  }
}

TEST(LeakageEpsilonTest, StubModelsReproduceReferenceColumn) {
  auto f = MakeReferenceEpsilonFixture();
  auto r = LeakageEpsilon(f.rows, *f.vocab, *f.private_model, *f.public_model);
  ASSERT_TRUE(r.ok()) << r.status();
  for (std::size_t i = 0; i < ReferencePairs().size(); ++i) {
    EXPECT_NEAR(r->per_sequence[i].pp_lm, ReferencePairs()[i].pp_lm, 1e-9);
    EXPECT_NEAR(r->per_sequence[i].pp_public, ReferencePairs()[i].pp_public,
                1e-9);
    EXPECT_NEAR(r->per_sequence[i].log_ratio, ReferencePairs()[i].log_ratio,
                0.005);
    EXPECT_EQ(r->per_sequence[i].sequence, ReferencePairs()[i].sequence);
  }
  EXPECT_NEAR(*r->epsilon_l, kReferenceEpsilon, 0.005);
}

TEST(LeakageEpsilonTest, IdenticalModelsGiveZero) {
  auto f = MakeReferenceEpsilonFixture();
  auto r = LeakageEpsilon(f.rows, *f.vocab, *f.private_model, *f.private_model);
  ASSERT_TRUE(r.ok());
  for (const auto& s : r->per_sequence) EXPECT_EQ(s.log_ratio, 0.0);
  EXPECT_EQ(*r->epsilon_l, 0.0);
}

TEST(LeakageEpsilonTest, UsesFirstContext) {
  auto f = MakeReferenceEpsilonFixture();
  std::vector<ReportRow> rows = {f.rows.back()};
  rows[0].contexts.push_back({"ctx0_0"});
  rows[0].context_lengths.push_back(1);
  rows[0].perplexities.push_back(9.0);
  rows[0].total_in_s = 2;
  auto r = LeakageEpsilon(rows, *f.vocab, *f.private_model, *f.public_model);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r->per_sequence[0].pp_lm, 3.53, 1e-9);
}

TEST(LeakageEpsilonTest, RedactedRowsRejected) {
  auto f = MakeReferenceEpsilonFixture();
  LeakageReport report;
  report.rows = f.rows;
  report = Redact(report);
  EXPECT_FALSE(
      LeakageEpsilon(report.rows, *f.vocab, *f.private_model, *f.public_model)
          .ok());
  EXPECT_FALSE(OwnerUsers(report).ok());
}

TEST(EpsilonJsonTest, FieldsAndDisplay) {
  auto r = EpsilonFromPerplexities(ReferenceAsPairs());
  const auto j = EpsilonToJson(*r);
  EXPECT_EQ(j["tool_version"], kToolVersion);
  ASSERT_EQ(j["per_sequence"].size(), 11);
  EXPECT_EQ(j["per_sequence"][10]["sequence"], "Wars ) is");
  EXPECT_EQ(j["per_sequence"][10]["display"]["log_ratio"], "0.64");
  EXPECT_EQ(j["per_sequence"][10]["pp_lm"].get<double>(), 3.53);
  EXPECT_EQ(j["epsilon_l_display"], "0.64");
  EXPECT_THAT(RenderEpsilonTable(*r), HasSubstr("Wars ) is\t3.53\t6.69\t0.64\n"));
}

TEST(AnnotateTest, SameModelIsPlausiblyPublic) {
  auto f = MakeReferenceEpsilonFixture();
  LeakageReport report;
  report.rows = f.rows;
  auto a = AnnotatePublicComparison(report, *f.vocab, *f.private_model);
  ASSERT_TRUE(a.ok()) << a.status();
  for (const auto& r : a->rows) {
    ASSERT_TRUE(r.public_comparison.has_value());
    EXPECT_TRUE(r.public_comparison->plausibly_public);
    EXPECT_NEAR(r.public_comparison->log_ratio[0], 0.0, 1e-12);
  }
  auto b = AnnotatePublicComparison(report, *f.vocab, *f.public_model);
  ASSERT_TRUE(b.ok());
  std::size_t flagged = 0;
  for (const auto& r : b->rows) flagged += r.public_comparison->plausibly_public;
  EXPECT_EQ(flagged, 2);  // the two negative ratios
  auto c = AnnotatePublicComparison(report, *f.vocab, *f.public_model, 0.6);
  flagged = 0;
  for (const auto& r : c->rows) flagged += r.public_comparison->plausibly_public;
  EXPECT_EQ(flagged, 10);
}

Corpus SmallCorpus() {
  Corpus c;
  EXPECT_TRUE(c.Add(Doc("u1", "1", "a b c a b")).ok());
  EXPECT_TRUE(c.Add(Doc("u2", "1", "b c a")).ok());
  EXPECT_TRUE(c.Add(Doc("u3", "1", "c c a b")).ok());
  EXPECT_TRUE(c.Add(Doc("u4", "1", "a a a")).ok());
  return c;
}

auto Trainer() {
  return [](const EncodedCorpus& c) { return TrainNgram(c); };
}

TEST(LeaveOutTest, EmptySetIsBaseline) {
  auto v = MakeVocab(Words("a b c"));
  auto e = Encode(SmallCorpus(), v);
  auto m = LeaveOutPublicModel(e, {}, Trainer());
  ASSERT_TRUE(m.ok());
  EXPECT_TRUE(*m == *TrainNgram(e));
}

TEST(LeaveOutTest, AllUsersIsAnError) {
  auto v = MakeVocab(Words("a b c"));
  auto e = Encode(SmallCorpus(), v);
  EXPECT_FALSE(LeaveOutPublicModel(e, {"u1", "u2", "u3", "u4"}, Trainer()).ok());
}

TEST(LeaveOutTest, SequentialEqualsJoint) {
  auto v = MakeVocab(Words("a b c"));
  auto e = Encode(SmallCorpus(), v);
  auto joint = LeaveOutPublicModel(e, {"u1", "u3"}, Trainer());
  auto seq = LeaveOutPublicModel(ExcludeUsers(e, {"u1"}), {"u3"}, Trainer());
  ASSERT_TRUE(joint.ok() && seq.ok());
  std::ostringstream a, b;
  joint->Save(a);
  seq->Save(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(LeaveOutTest, OwnerUsersFromRows) {
  auto f = MakeReferenceEpsilonFixture();
  LeakageReport report;
  report.rows = f.rows;
  auto owners = OwnerUsers(report);
  ASSERT_TRUE(owners.ok());
  EXPECT_EQ(owners->size(), 11);
  report.rows[0].owners.clear();
  EXPECT_FALSE(OwnerUsers(report).ok());
}

TEST(LeaveOutTest, ExcludedOwnerRaisesPublicPerplexity) {
  auto v = MakeVocab(Words("a b c secret word"));
  Corpus c = SmallCorpus();
  ASSERT_TRUE(c.Add(Doc("u9", "1", "a secret word")).ok());
  ASSERT_TRUE(c.Add(Doc("u9", "2", "b secret word")).ok());
  auto e = Encode(c, v);
  auto priv = TrainNgram(e);
  auto pub = LeaveOutPublicModel(e, {"u9"}, Trainer());
  ASSERT_TRUE(priv.ok() && pub.ok());
  const auto ctx = Ids(*v, "a");
  const auto seq = Ids(*v, "secret word");
  EXPECT_GT(Perplexity(*pub, ctx, seq)->value, Perplexity(*priv, ctx, seq)->value);
}

}  // namespace
}  // namespace leakaudit
