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

// Client side of the external-model protocol: one JSON object per line over
// the child's stdin/stdout.
//
//   request  {"id": n, "op": "hello"}
//            {"id": n, "op": "topk", "context": [..], "k": k}
//            {"id": n, "op": "logprob_batch", "items": [[context, token], ..]}
//   response {"id": n, "ok": true, "result": ...}
//            {"id": n, "ok": false, "error": "..."}
//
// hello answers {"vocab_size": V, "protocol_version": 1}; topk answers a
// ranked id list; logprob_batch answers natural-log probabilities aligned
// with the items.

#ifndef LEAKAUDIT_ADAPTER_MODEL_H_
#define LEAKAUDIT_ADAPTER_MODEL_H_

#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "leakaudit/language_model.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

inline constexpr int kAdapterProtocolVersion = 1;
inline constexpr std::size_t kMaxAdapterMessageBytes = 16u << 20;

namespace internal {

inline nlohmann::json IdArray(std::span<const TokenId> ids) {
  return nlohmann::json(std::vector<TokenId>(ids.begin(), ids.end()));
}

}  // namespace internal

class AdapterModel final : public LanguageModel {
 public:
  // Starts `command` under /bin/sh and performs the hello handshake.
  static absl::StatusOr<std::unique_ptr<AdapterModel>> Launch(
      const std::string& command) {
    int sv[2];
    if (socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
      return absl::InternalError(
          absl::StrCat("socketpair: ", std::strerror(errno)));
    }
    const pid_t pid = fork();
    if (pid < 0) {
      close(sv[0]);
      close(sv[1]);
      return absl::InternalError(absl::StrCat("fork: ", std::strerror(errno)));
    }
    if (pid == 0) {
      close(sv[0]);
      dup2(sv[1], STDIN_FILENO);
      dup2(sv[1], STDOUT_FILENO);
      if (sv[1] > STDOUT_FILENO) close(sv[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(sv[1]);
    std::unique_ptr<AdapterModel> model(new AdapterModel(sv[0], pid));
    LEAKAUDIT_ASSIGN_OR_RETURN(auto hello,
                               model->Call({{"op", "hello"}}));
    try {
      model->vocab_size_ = hello.at("vocab_size").get<std::size_t>();
      model->protocol_version_ = hello.at("protocol_version").get<int>();
    } catch (const nlohmann::json::exception& e) {
      return absl::InternalError(absl::StrCat("bad hello result: ", e.what()));
    }
    if (model->protocol_version_ != kAdapterProtocolVersion) {
      return absl::FailedPreconditionError(absl::StrCat(
          "unsupported adapter protocol version ", model->protocol_version_));
    }
    if (model->vocab_size_ == 0) {
      return absl::FailedPreconditionError("adapter reports an empty vocabulary");
    }
    return model;
  }

  ~AdapterModel() override {
    shutdown(fd_, SHUT_WR);
    close(fd_);
    int status = 0;
    for (int i = 0; i < 200; ++i) {
      if (waitpid(pid_, &status, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
  }

  AdapterModel(const AdapterModel&) = delete;
  AdapterModel& operator=(const AdapterModel&) = delete;

  std::size_t vocab_size() const override { return vocab_size_; }
  int protocol_version() const { return protocol_version_; }

  absl::StatusOr<std::vector<double>> NextDistribution(
      std::span<const TokenId> context) const override {
    std::vector<std::pair<std::span<const TokenId>, TokenId>> items;
    items.reserve(vocab_size_);
    for (TokenId t = 0; t < vocab_size_; ++t) items.emplace_back(context, t);
    LEAKAUDIT_ASSIGN_OR_RETURN(auto lps, LogProbItems(items));
    for (double& x : lps) x = std::exp(x);
    return lps;
  }

  absl::StatusOr<double> LogProb(std::span<const TokenId> context,
                                 TokenId token) const override {
    if (token >= vocab_size_) {
      return absl::OutOfRangeError(absl::StrCat("token id ", token));
    }
    std::pair<std::span<const TokenId>, TokenId> item{context, token};
    LEAKAUDIT_ASSIGN_OR_RETURN(auto lps, LogProbItems({&item, 1}));
    return lps.front();
  }

  absl::StatusOr<std::vector<TokenId>> TopK(std::span<const TokenId> context,
                                            std::size_t k) const override {
    LEAKAUDIT_RETURN_IF_ERROR(CheckTopKWidth(k, vocab_size_));
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto r, Call({{"op", "topk"}, {"context", internal::IdArray(context)}, {"k", k}}));
    return ParseTopK(r, k);
  }

  // Pipelined: one topk request per query plus batched logprob requests.
  absl::StatusOr<std::vector<PositionScore>> ScorePositions(
      std::span<const PositionQuery> queries) const override {
    std::vector<nlohmann::json> requests;
    std::vector<std::pair<std::span<const TokenId>, TokenId>> targets;
    bool need_top1 = false;
    for (const auto& q : queries) {
      LEAKAUDIT_RETURN_IF_ERROR(CheckTopKWidth(q.k, vocab_size_));
      if (q.target >= vocab_size_) {
        return absl::OutOfRangeError(absl::StrCat("token id ", q.target));
      }
      requests.push_back({{"op", "topk"}, {"context", internal::IdArray(q.context)}, {"k", q.k}});
      targets.emplace_back(q.context, q.target);
      need_top1 = need_top1 || q.need_top1_prob;
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(auto topk_results, CallMany(std::move(requests)));
    LEAKAUDIT_ASSIGN_OR_RETURN(auto target_lps, LogProbItems(targets));
    std::vector<PositionScore> out(queries.size());
    std::vector<std::pair<std::span<const TokenId>, TokenId>> top1_items;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      LEAKAUDIT_ASSIGN_OR_RETURN(auto ranked,
                                 ParseTopK(topk_results[i], queries[i].k));
      out[i].top1 = ranked.front();
      out[i].target_in_top_k =
          std::find(ranked.begin(), ranked.end(), queries[i].target) !=
          ranked.end();
      out[i].target_log_prob = target_lps[i];
      if (need_top1) top1_items.emplace_back(queries[i].context, out[i].top1);
    }
    if (need_top1) {
      LEAKAUDIT_ASSIGN_OR_RETURN(auto top1_lps, LogProbItems(top1_items));
      for (std::size_t i = 0; i < queries.size(); ++i) {
        out[i].top1_prob = std::exp(top1_lps[i]);
      }
    }
    return out;
  }

 private:
  AdapterModel(int fd, pid_t pid) : fd_(fd), pid_(pid) {}

  absl::StatusOr<std::vector<TokenId>> ParseTopK(const nlohmann::json& r,
                                                 std::size_t k) const {
    std::vector<TokenId> ids;
    try {
      ids = r.get<std::vector<TokenId>>();
    } catch (const nlohmann::json::exception& e) {
      return absl::InternalError(absl::StrCat("bad topk result: ", e.what()));
    }
    if (ids.size() != k) {
      return absl::InternalError(absl::StrCat("topk returned ", ids.size(),
                                              " ids, expected ", k));
    }
    for (TokenId t : ids) {
      if (t >= vocab_size_) {
        return absl::InternalError("topk returned an out-of-range id");
      }
    }
    return ids;
  }

  // Splits items across logprob_batch requests so no message nears the size
  // cap.
  absl::StatusOr<std::vector<double>> LogProbItems(
      std::span<const std::pair<std::span<const TokenId>, TokenId>> items)
      const {
    std::vector<nlohmann::json> requests;
    std::vector<std::size_t> sizes;
    nlohmann::json batch = nlohmann::json::array();
    std::size_t approx_bytes = 0;
    for (const auto& [ctx, tok] : items) {
      const std::size_t item_bytes = 16 + 11 * (ctx.size() + 1);
      if (!batch.empty() && approx_bytes + item_bytes > kMaxAdapterMessageBytes / 2) {
        sizes.push_back(batch.size());
        requests.push_back({{"op", "logprob_batch"}, {"items", std::move(batch)}});
        batch = nlohmann::json::array();
        approx_bytes = 0;
      }
      batch.push_back({internal::IdArray(ctx), tok});
      approx_bytes += item_bytes;
    }
    if (!batch.empty()) {
      sizes.push_back(batch.size());
      requests.push_back({{"op", "logprob_batch"}, {"items", std::move(batch)}});
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(auto results, CallMany(std::move(requests)));
    std::vector<double> out;
    out.reserve(items.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i].is_array() || results[i].size() != sizes[i]) {
        return absl::InternalError("logprob_batch result size mismatch");
      }
      for (const auto& v : results[i]) {
        if (!v.is_number()) {
          return absl::InternalError("logprob_batch result is not numeric");
        }
        out.push_back(v.get<double>());
      }
    }
    return out;
  }

  absl::StatusOr<nlohmann::json> Call(nlohmann::json request) const {
    std::vector<nlohmann::json> one;
    one.push_back(std::move(request));
    LEAKAUDIT_ASSIGN_OR_RETURN(auto results, CallMany(std::move(one)));
    return std::move(results.front());
  }

  // Sends every request (on a writer thread) while reading the responses in
  // order; each response must echo its request id.
  absl::StatusOr<std::vector<nlohmann::json>> CallMany(
      std::vector<nlohmann::json> requests) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (broken_) {
      return absl::UnavailableError("adapter connection is broken");
    }
    std::vector<std::int64_t> ids;
    std::string wire;
    for (auto& r : requests) {
      const std::int64_t id = next_id_++;
      ids.push_back(id);
      r["id"] = id;
      std::string line = r.dump();
      if (line.size() >= kMaxAdapterMessageBytes) {
        return absl::InvalidArgumentError("adapter request exceeds 16 MiB");
      }
      wire += line;
      wire += '\n';
    }
    absl::Status write_status;
    std::thread writer([&] { write_status = WriteAll(wire); });
    std::vector<nlohmann::json> results;
    absl::Status read_status;
    // An ok=false answer fails the call but leaves the stream in step, so the
    // remaining responses are still drained.
    absl::Status app_status;
    for (std::size_t i = 0; i < ids.size() && read_status.ok(); ++i) {
      auto line = ReadLine();
      if (!line.ok()) {
        read_status = line.status();
        break;
      }
      auto resp = nlohmann::json::parse(*line, nullptr, false);
      if (!resp.is_object() || !resp.contains("id") ||
          !resp["id"].is_number_integer()) {
        read_status = absl::InternalError("malformed adapter response");
      } else if (resp["id"].get<std::int64_t>() != ids[i]) {
        read_status = absl::InternalError(
            absl::StrCat("adapter response id ", resp["id"].dump(),
                         " does not match request id ", ids[i]));
      } else if (!resp.value("ok", false)) {
        if (app_status.ok()) {
          app_status = absl::InternalError(absl::StrCat(
              "adapter error: ", resp.value("error", std::string("unknown"))));
        }
      } else if (!resp.contains("result")) {
        read_status = absl::InternalError("adapter response lacks a result");
      } else {
        results.push_back(std::move(resp["result"]));
      }
    }
    if (!read_status.ok()) {
      // The writer may be blocked on a peer that stopped reading.
      broken_ = true;
      shutdown(fd_, SHUT_RDWR);
    }
    writer.join();
    LEAKAUDIT_RETURN_IF_ERROR(read_status);
    if (!write_status.ok()) {
      broken_ = true;
      return write_status;
    }
    LEAKAUDIT_RETURN_IF_ERROR(app_status);
    return results;
  }

  absl::Status WriteAll(const std::string& data) const {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n =
          send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        return absl::UnavailableError(
            absl::StrCat("adapter write: ", std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
    return absl::OkStatus();
  }

  absl::StatusOr<std::string> ReadLine() const {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      if (buffer_.size() > kMaxAdapterMessageBytes) {
        return absl::InternalError("adapter response exceeds 16 MiB");
      }
      char chunk[1 << 16];
      const ssize_t n = recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        return absl::UnavailableError("adapter closed the connection");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  int fd_;
  pid_t pid_;
  std::size_t vocab_size_ = 0;
  int protocol_version_ = 0;
  mutable std::mutex mu_;
  mutable std::int64_t next_id_ = 1;
  mutable std::string buffer_;
  mutable bool broken_ = false;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_ADAPTER_MODEL_H_
