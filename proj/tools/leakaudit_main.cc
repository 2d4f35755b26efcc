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

// leakaudit: staged training-data leakage audit.
//
//   leakaudit build-vocab --corpus c.jsonl --topk 10000 --out vocab.txt
//   leakaudit train       --corpus c.jsonl --vocab vocab.txt --out model.json
//   leakaudit analyze     --corpus c.jsonl --vocab vocab.txt --model model.json
//                         --filter unique --jsonl report.jsonl
//   leakaudit epsilon     --report report.jsonl --vocab vocab.txt
//                         --model model.json --leave-out --corpus c.jsonl
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstddef>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "leakaudit/leakaudit.h"

namespace leakaudit {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

absl::StatusOr<Corpus> LoadCorpus(const std::string& path, bool dedup) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open corpus ", path));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto ingested, Ingest(in));
  if (ingested.dropped_empty > 0) {
    std::cerr << "warning: dropped " << ingested.dropped_empty
              << " record(s) with no tokens\n";
  }
  if (!dedup) return std::move(ingested.corpus);
  auto d = DedupSentences(ingested.corpus);
  std::cerr << "dedup: removed " << d.removed << " duplicate document(s)\n";
  return std::move(d.corpus);
}

absl::StatusOr<std::shared_ptr<const Vocabulary>> LoadVocab(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open vocabulary ", path));
  }
  LEAKAUDIT_ASSIGN_OR_RETURN(auto v, Vocabulary::Load(in));
  return std::make_shared<const Vocabulary>(std::move(v));
}

absl::StatusOr<InterpolatedNgramLm> LoadNgram(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open model ", path));
  return InterpolatedNgramLm::Load(in);
}

absl::StatusOr<std::set<std::string>> LoadUserList(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::set<std::string> users;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) users.insert(line);
  }
  return users;
}

absl::Status WriteFile(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) return absl::DataLossError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

// A model plus, for n-gram models, the hyperparameters needed to retrain it.
struct ModelHandle {
  std::unique_ptr<LanguageModel> model;
  std::optional<int> order;
  std::vector<double> lambdas;
};

ModelHandle FromNgram(InterpolatedNgramLm m) {
  ModelHandle h;
  h.order = m.order();
  h.lambdas = m.lambdas();
  h.model = std::make_unique<InterpolatedNgramLm>(std::move(m));
  return h;
}

struct PipelineKnobs {
  std::size_t workers = 0;
  std::size_t partitions = 0;
  std::size_t batch_size = kDefaultBatchSize;

  PoolOptions pool() const { return {ResolvedWorkers()}; }
  std::size_t ResolvedWorkers() const {
    return workers > 0 ? workers : WorkersFromEnvironment(1);
  }
  absl::StatusOr<PartitionPlan> Plan(std::size_t n_items) const {
    const std::size_t p = partitions > 0 ? partitions : ResolvedWorkers();
    return PartitionPlan::Contiguous(n_items, p, batch_size);
  }
};

void AddPipelineOptions(CLI::App* cmd, PipelineKnobs* knobs) {
  cmd->add_option("--workers", knobs->workers,
                  absl::StrCat("Worker threads (default: $", kWorkersEnvVar,
                               " or 1)"))
      ->check(CLI::PositiveNumber);
  cmd->add_option("--partitions", knobs->partitions,
                  "Corpus partitions (default: worker count)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", knobs->batch_size,
                  "Model queries per batch")
      ->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------- build-vocab

struct BuildVocabArgs {
  std::string corpus;
  std::optional<std::size_t> topk;
  std::optional<std::size_t> user_threshold;
  std::string out;
  bool dedup = false;
};

absl::Status RunBuildVocab(const BuildVocabArgs& a) {
  if (a.topk.has_value() == a.user_threshold.has_value()) {
    throw UsageError("exactly one of --topk or --user-threshold is required");
  }
  LEAKAUDIT_ASSIGN_OR_RETURN(auto corpus, LoadCorpus(a.corpus, a.dedup));
  absl::StatusOr<Vocabulary> vocab =
      a.topk ? BuildVocabTopK(corpus, *a.topk)
             : BuildVocabUserThreshold(corpus, *a.user_threshold);
  LEAKAUDIT_RETURN_IF_ERROR(vocab.status());
  std::ostringstream text;
  vocab->Save(text);
  LEAKAUDIT_RETURN_IF_ERROR(WriteFile(a.out, text.str()));
  std::size_t total = 0, oov = 0;
  for (const auto& d : corpus.documents()) {
    for (const auto& t : d.tokens) {
      ++total;
      if (vocab->Lookup(t) == vocab->unk_id()) ++oov;
    }
  }
  std::cout << "vocab_size: " << vocab->size() << "\n"
            << "oov_rate: "
            << absl::StrFormat("%.6f", total ? static_cast<double>(oov) /
                                                   static_cast<double>(total)
                                             : 0.0)
            << "\n";
  return absl::OkStatus();
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus;
  std::string vocab;
  int order = kDefaultNgramOrder;
  std::vector<double> lambdas = DefaultNgramLambdas();
  std::string exclude_users;
  std::string out;
  bool dedup = false;
};

absl::Status RunTrain(const TrainArgs& a) {
  LEAKAUDIT_ASSIGN_OR_RETURN(auto corpus, LoadCorpus(a.corpus, a.dedup));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto vocab, LoadVocab(a.vocab));
  EncodedCorpus encoded = Encode(corpus, vocab);
  if (!a.exclude_users.empty()) {
    LEAKAUDIT_ASSIGN_OR_RETURN(auto users, LoadUserList(a.exclude_users));
    encoded = ExcludeUsers(encoded, users);
  }
  LEAKAUDIT_ASSIGN_OR_RETURN(auto model, TrainNgram(encoded, a.order, a.lambdas));
  std::ostringstream text;
  model.Save(text);
  LEAKAUDIT_RETURN_IF_ERROR(WriteFile(a.out, text.str()));
  std::cout << "order: " << model.order() << "\n"
            << "vocab_size: " << model.vocab_size() << "\n"
            << "documents: " << encoded.size() << "\n";
  return absl::OkStatus();
}

// -------------------------------------------------------------------- analyze

struct ModelSourceArgs {
  std::string model_path;
  std::string adapter;
  bool train_ngram = false;
  int order = kDefaultNgramOrder;
  std::vector<double> lambdas = DefaultNgramLambdas();
};

void CheckModelSource(const ModelSourceArgs& a) {
  const int sources = !a.model_path.empty() + !a.adapter.empty() + a.train_ngram;
  if (sources != 1) {
    throw UsageError(
        "exactly one model source is required: --model, --adapter or "
        "--train-ngram");
  }
}

absl::StatusOr<ModelHandle> OpenModel(const ModelSourceArgs& a,
                                      const EncodedCorpus* corpus) {
  CheckModelSource(a);
  if (!a.model_path.empty()) {
    LEAKAUDIT_ASSIGN_OR_RETURN(auto m, LoadNgram(a.model_path));
    return FromNgram(std::move(m));
  }
  if (!a.adapter.empty()) {
    LEAKAUDIT_ASSIGN_OR_RETURN(auto m, AdapterModel::Launch(a.adapter));
    return ModelHandle{std::move(m), std::nullopt, {}};
  }
  if (corpus == nullptr) {
    throw UsageError("--train-ngram requires --corpus");
  }
  LEAKAUDIT_ASSIGN_OR_RETURN(auto m, TrainNgram(*corpus, a.order, a.lambdas));
  return FromNgram(std::move(m));
}

struct AnalyzeArgs {
  std::string corpus;
  std::string vocab;
  ModelSourceArgs source;
  ExtractionConfig extraction;
  std::optional<double> confidence_threshold;
  bool redact = false;
  std::string filter = "none";
  std::string public_model;
  double flag_threshold = 0.0;
  std::string csv;
  std::string jsonl;
  std::string summary;
  bool dedup = false;
  PipelineKnobs knobs;
};

absl::Status RunAnalyze(const AnalyzeArgs& a) {
  ExtractionConfig config = a.extraction;
  config.confidence_threshold = a.confidence_threshold;
  CheckModelSource(a.source);
  LEAKAUDIT_ASSIGN_OR_RETURN(auto corpus, LoadCorpus(a.corpus, a.dedup));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto vocab, LoadVocab(a.vocab));
  const EncodedCorpus encoded = Encode(corpus, vocab);
  LEAKAUDIT_ASSIGN_OR_RETURN(auto handle, OpenModel(a.source, &encoded));
  const LanguageModel& model = *handle.model;

  LEAKAUDIT_ASSIGN_OR_RETURN(auto plan, a.knobs.Plan(encoded.size()));
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto runs, ParallelExtract(model, encoded, config, plan, a.knobs.pool()));
  auto groups = AggregateRuns(runs);
  const auto patterns = Sequences(groups);
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto counts, ParallelCount(patterns, encoded, plan, a.knobs.pool()));
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto report, AssembleReport(std::move(groups), counts, encoded.vocab(),
                                  config, /*redact=*/false));
  const std::size_t n_rows = report.rows.size();
  const std::size_t n_unique = FilterUnique(report).rows.size();
  const std::size_t n_singleton = FilterSingleton(report).rows.size();
  if (a.filter == "unique") {
    report = FilterUnique(std::move(report));
  } else if (a.filter == "singleton") {
    report = FilterSingleton(std::move(report));
  }
  if (!a.public_model.empty()) {
    LEAKAUDIT_ASSIGN_OR_RETURN(auto pub, LoadNgram(a.public_model));
    LEAKAUDIT_ASSIGN_OR_RETURN(
        report, AnnotatePublicComparison(std::move(report), encoded.vocab(),
                                         pub, a.flag_threshold));
  }
  if (a.redact) report = Redact(std::move(report));

  if (!a.csv.empty()) {
    std::ostringstream text;
    LEAKAUDIT_RETURN_IF_ERROR(ExportCsv(report, text).status());
    LEAKAUDIT_RETURN_IF_ERROR(WriteFile(a.csv, text.str()));
  }
  if (!a.jsonl.empty()) {
    std::ostringstream text;
    LEAKAUDIT_RETURN_IF_ERROR(ExportJsonl(report, text).status());
    LEAKAUDIT_RETURN_IF_ERROR(WriteFile(a.jsonl, text.str()));
  }
  std::size_t correct_positions = 0;
  for (const Run& r : runs) correct_positions += r.tokens.size();
  std::cout << "runs: " << runs.size() << "\n"
            << "correct_positions: " << correct_positions << "\n"
            << "rows: " << n_rows << "\n"
            << "unique_sequences: " << n_unique << "\n"
            << "singleton_sequences: " << n_singleton << "\n"
            << "reported_rows: " << report.rows.size() << "\n";
  if (!a.summary.empty()) {
    nlohmann::ordered_json s;
    s["tool_version"] = kToolVersion;
    s["config"] = {{"k", config.k},
                   {"min_run_len", config.min_run_len},
                   {"confidence_threshold",
                    config.confidence_threshold
                        ? nlohmann::ordered_json(*config.confidence_threshold)
                        : nlohmann::ordered_json(nullptr)},
                   {"count_unk_targets", config.count_unk_targets},
                   {"redact", a.redact},
                   {"filter", a.filter}};
    s["runs"] = runs.size();
    s["correct_positions"] = correct_positions;
    s["rows"] = n_rows;
    s["unique_sequences"] = n_unique;
    s["singleton_sequences"] = n_singleton;
    s["reported_rows"] = report.rows.size();
    LEAKAUDIT_RETURN_IF_ERROR(WriteFile(a.summary, s.dump(2) + "\n"));
  }
  return absl::OkStatus();
}

// -------------------------------------------------------------------- epsilon

struct EpsilonArgs {
  std::string report;
  std::string report_format = "auto";
  std::string vocab;
  ModelSourceArgs source;
  std::string public_model;
  std::string public_adapter;
  bool leave_out = false;
  std::string corpus;
  bool dedup = false;
  std::string out;
  PipelineKnobs knobs;
};

absl::StatusOr<LeakageReport> LoadReport(const std::string& path,
                                         std::string format) {
  if (format == "auto") {
    format = path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
                 ? "csv"
                 : "jsonl";
  }
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open report ", path));
  return ImportReport(in, format == "csv" ? ReportFormat::kCsv
                                          : ReportFormat::kJsonl);
}

absl::Status RunEpsilon(const EpsilonArgs& a) {
  const int public_sources =
      !a.public_model.empty() + !a.public_adapter.empty() + a.leave_out;
  if (public_sources != 1) {
    throw UsageError(
        "exactly one public model source is required: --public-model, "
        "--public-adapter or --leave-out");
  }
  if ((a.leave_out || a.source.train_ngram) && a.corpus.empty()) {
    throw UsageError("--leave-out and --train-ngram require --corpus");
  }
  CheckModelSource(a.source);
  LEAKAUDIT_ASSIGN_OR_RETURN(auto report, LoadReport(a.report, a.report_format));
  report = FilterUnique(std::move(report));
  LEAKAUDIT_ASSIGN_OR_RETURN(auto vocab, LoadVocab(a.vocab));

  EpsilonResult result;
  if (!report.rows.empty()) {
    std::optional<EncodedCorpus> encoded;
    if (!a.corpus.empty()) {
      LEAKAUDIT_ASSIGN_OR_RETURN(auto corpus, LoadCorpus(a.corpus, a.dedup));
      encoded = Encode(corpus, vocab);
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto priv, OpenModel(a.source, encoded ? &*encoded : nullptr));
    std::unique_ptr<LanguageModel> pub;
    if (!a.public_model.empty()) {
      LEAKAUDIT_ASSIGN_OR_RETURN(auto m, LoadNgram(a.public_model));
      pub = std::make_unique<InterpolatedNgramLm>(std::move(m));
    } else if (!a.public_adapter.empty()) {
      LEAKAUDIT_ASSIGN_OR_RETURN(pub, AdapterModel::Launch(a.public_adapter));
    } else {
      if (!priv.order) {
        return absl::FailedPreconditionError(
            "--leave-out needs an n-gram private model to retrain");
      }
      LEAKAUDIT_ASSIGN_OR_RETURN(auto owners, OwnerUsers(report));
      LEAKAUDIT_ASSIGN_OR_RETURN(
          auto m, LeaveOutPublicModel(*encoded, owners,
                                      [&](const EncodedCorpus& c) {
                                        return TrainNgram(c, *priv.order,
                                                          priv.lambdas);
                                      }));
      std::cerr << "leave-out: excluded " << owners.size() << " owner user(s)\n";
      pub = std::make_unique<InterpolatedNgramLm>(std::move(m));
    }
    if (priv.model->vocab_size() != vocab->size() ||
        pub->vocab_size() != vocab->size()) {
      return absl::FailedPreconditionError(
          "model vocabulary size does not match the vocabulary file");
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(auto items,
                               EpsilonScoringItems(report.rows, *vocab));
    LEAKAUDIT_ASSIGN_OR_RETURN(auto plan, a.knobs.Plan(items.size()));
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto pp_lm, ParallelScore(*priv.model, items, plan, a.knobs.pool()));
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto pp_pub, ParallelScore(*pub, items, plan, a.knobs.pool()));
    std::vector<PerplexityPair> pairs;
    for (std::size_t i = 0; i < items.size(); ++i) {
      pairs.push_back({absl::StrJoin(report.rows[i].sequence, " "),
                       pp_lm[i].value, pp_pub[i].value});
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(result, EpsilonFromPerplexities(pairs));
  }
  if (!a.out.empty()) {
    LEAKAUDIT_RETURN_IF_ERROR(
        WriteFile(a.out, EpsilonToJson(result).dump(2) + "\n"));
  }
  std::cout << RenderEpsilonTable(result);
  std::cout << "epsilon_l: "
            << (result.epsilon_l ? DisplayFixed2(*result.epsilon_l) : "none")
            << "\n";
  return absl::OkStatus();
}

void AddModelSourceOptions(CLI::App* cmd, ModelSourceArgs* s) {
  auto* model = cmd->add_option("--model", s->model_path, "Model file");
  auto* adapter =
      cmd->add_option("--adapter", s->adapter, "External model command");
  auto* train = cmd->add_flag("--train-ngram", s->train_ngram,
                              "Train an n-gram model on the corpus");
  model->excludes(adapter)->excludes(train);
  adapter->excludes(train);
  cmd->add_option("--order", s->order, "n-gram order for --train-ngram")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lambdas", s->lambdas,
                  "Interpolation weights (uniform, unigram, ...)")
      ->delimiter(',');
}

int Main(int argc, char** argv) {
  CLI::App app{"Training-data leakage audit for language models"};
  app.set_config("--config", "", "Config file (TOML/INI); flags take precedence");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  BuildVocabArgs bv;
  auto* cmd_bv = app.add_subcommand("build-vocab", "Build a vocabulary file");
  cmd_bv->add_option("--corpus", bv.corpus, "Corpus JSONL")->required();
  auto* topk = cmd_bv->add_option("--topk", bv.topk, "Keep the k most frequent tokens");
  auto* thr = cmd_bv->add_option("--user-threshold", bv.user_threshold,
                                 "Keep tokens used by at least m users");
  topk->excludes(thr);
  cmd_bv->add_option("--out", bv.out, "Vocabulary output path")->required();
  cmd_bv->add_flag("--dedup", bv.dedup, "Drop duplicate documents first");

  TrainArgs tr;
  auto* cmd_tr = app.add_subcommand("train", "Train the built-in n-gram model");
  cmd_tr->add_option("--corpus", tr.corpus, "Corpus JSONL")->required();
  cmd_tr->add_option("--vocab", tr.vocab, "Vocabulary file")->required();
  cmd_tr->add_option("--order", tr.order, "n-gram order")->check(CLI::PositiveNumber);
  cmd_tr->add_option("--lambdas", tr.lambdas, "Interpolation weights")
      ->delimiter(',');
  cmd_tr->add_option("--exclude-users", tr.exclude_users,
                     "File of user ids to leave out, one per line");
  cmd_tr->add_option("--out", tr.out, "Model output path")->required();
  cmd_tr->add_flag("--dedup", tr.dedup, "Drop duplicate documents first");

  AnalyzeArgs an;
  auto* cmd_an = app.add_subcommand("analyze", "Extract runs and build the leakage report");
  cmd_an->add_option("--corpus", an.corpus, "Corpus JSONL")->required();
  cmd_an->add_option("--vocab", an.vocab, "Vocabulary file")->required();
  AddModelSourceOptions(cmd_an, &an.source);
  cmd_an->add_option("--k", an.extraction.k, "Top-k width (1 = tab attack)")
      ->check(CLI::PositiveNumber);
  cmd_an->add_option("--min-run-len", an.extraction.min_run_len,
                     "Minimum tokens per reported run")
      ->check(CLI::PositiveNumber);
  cmd_an->add_option("--confidence-threshold", an.confidence_threshold,
                     "Suppress predictions whose 1/p(top-1) exceeds this");
  cmd_an->add_flag("--count-unk-targets", an.extraction.count_unk_targets,
                   "Count correctly predicted UNK tokens");
  cmd_an->add_flag("--redact", an.redact, "Replace tokens with lengths");
  cmd_an->add_option("--filter", an.filter, "none | unique | singleton")
      ->check(CLI::IsMember({"none", "unique", "singleton"}));
  cmd_an->add_option("--public-model", an.public_model,
                     "Annotate rows against this public model");
  cmd_an->add_option("--flag-threshold", an.flag_threshold,
                     "log-ratio at or below which rows are plausibly public");
  cmd_an->add_option("--csv", an.csv, "CSV report path");
  cmd_an->add_option("--jsonl", an.jsonl, "JSONL report path");
  cmd_an->add_option("--summary", an.summary, "Summary JSON path");
  cmd_an->add_flag("--dedup", an.dedup, "Drop duplicate documents first");
  AddPipelineOptions(cmd_an, &an.knobs);

  EpsilonArgs ep;
  auto* cmd_ep = app.add_subcommand("epsilon", "Worst-case leakage epsilon");
  cmd_ep->add_option("--report", ep.report, "Leakage report (JSONL or CSV)")
      ->required();
  cmd_ep->add_option("--report-format", ep.report_format, "auto | csv | jsonl")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  cmd_ep->add_option("--vocab", ep.vocab, "Vocabulary file")->required();
  AddModelSourceOptions(cmd_ep, &ep.source);
  auto* pm = cmd_ep->add_option("--public-model", ep.public_model, "Public model file");
  auto* pa = cmd_ep->add_option("--public-adapter", ep.public_adapter,
                                "External public model command");
  auto* lo = cmd_ep->add_flag("--leave-out", ep.leave_out,
                              "Retrain without the owners of unique sequences");
  pm->excludes(pa)->excludes(lo);
  pa->excludes(lo);
  cmd_ep->add_option("--corpus", ep.corpus, "Corpus JSONL (for --leave-out)");
  cmd_ep->add_flag("--dedup", ep.dedup, "Drop duplicate documents first");
  cmd_ep->add_option("--out", ep.out, "Epsilon JSON output path");
  AddPipelineOptions(cmd_ep, &ep.knobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  absl::Status status;
  try {
    if (*cmd_bv) {
      status = RunBuildVocab(bv);
    } else if (*cmd_tr) {
      status = RunTrain(tr);
    } else if (*cmd_an) {
      status = RunAnalyze(an);
    } else if (*cmd_ep) {
      status = RunEpsilon(ep);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!status.ok()) {
    std::cerr << "error: " << status << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace
}  // namespace leakaudit

int main(int argc, char** argv) { return leakaudit::Main(argc, argv); }
