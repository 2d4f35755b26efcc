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

// CSV and JSONL serialization of leakage reports.
//
// CSV header:
//   sequence,total_in_S,user_in_S,total_in_D,user_in_D,contexts,perplexities
// followed by pp_public,log_ratio,plausibly_public on annotated reports.
// `contexts` and `perplexities` are bracketed arrays; perplexity-like values
// are printed with two decimals. JSONL keeps full precision.

#ifndef LEAKAUDIT_REPORT_IO_H_
#define LEAKAUDIT_REPORT_IO_H_

#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "leakaudit/stats.h"
#include "leakaudit/status_macros.h"

namespace leakaudit {

enum class ReportFormat { kCsv, kJsonl };

inline constexpr char kCsvHeader[] =
    "sequence,total_in_S,user_in_S,total_in_D,user_in_D,contexts,perplexities";
inline constexpr char kCsvAnnotationHeader[] =
    ",pp_public,log_ratio,plausibly_public";

namespace internal {

inline std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string Fixed2(double x) { return absl::StrFormat("%.2f", x); }

inline std::string FixedArray(const std::vector<double>& xs) {
  std::vector<std::string> parts;
  for (double x : xs) parts.push_back(Fixed2(x));
  return absl::StrCat("[", absl::StrJoin(parts, ", "), "]");
}

inline std::string ContextsArray(const ReportRow& r, bool redacted) {
  std::vector<std::string> parts;
  if (redacted) {
    for (std::size_t n : r.context_lengths) parts.push_back(std::to_string(n));
  } else {
    for (const auto& c : r.contexts) {
      parts.push_back(nlohmann::json(absl::StrJoin(c, " ")).dump());
    }
  }
  return absl::StrCat("[", absl::StrJoin(parts, ", "), "]");
}

inline bool IsAnnotated(const LeakageReport& report) {
  return !report.rows.empty() &&
         report.rows.front().public_comparison.has_value();
}

inline absl::StatusOr<std::size_t> WriteOut(std::ostream& out,
                                            const std::string& text,
                                            std::size_t row) {
  out << text;
  if (!out) {
    return absl::DataLossError(absl::StrCat("write failed at report row ", row));
  }
  return text.size();
}

// RFC 4180 record reader; returns false at end of input.
inline absl::StatusOr<bool> ReadCsvRecord(std::istream& in,
                                          std::vector<std::string>* fields) {
  fields->clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields->push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) return absl::InvalidArgumentError("unterminated quoted field");
  fields->push_back(std::move(field));
  return true;
}

inline std::vector<std::string> SplitTokens(absl::string_view s) {
  return absl::StrSplit(s, ' ', absl::SkipEmpty());
}

inline absl::StatusOr<std::uint64_t> ParseCount(absl::string_view s) {
  std::uint64_t v = 0;
  if (s.empty()) return absl::InvalidArgumentError("empty count field");
  for (char c : s) {
    if (c < '0' || c > '9') {
      return absl::InvalidArgumentError(absl::StrCat("bad count: ", s));
    }
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace internal

inline absl::StatusOr<std::size_t> ExportCsv(const LeakageReport& report,
                                             std::ostream& out) {
  const bool annotated = internal::IsAnnotated(report);
  std::size_t bytes = 0;
  LEAKAUDIT_ASSIGN_OR_RETURN(
      auto n, internal::WriteOut(
                  out,
                  absl::StrCat(kCsvHeader,
                               annotated ? kCsvAnnotationHeader : "", "\n"),
                  0));
  bytes += n;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const ReportRow& r = report.rows[i];
    std::string line = absl::StrCat(
        internal::CsvField(report.redacted ? std::to_string(r.sequence_length)
                                           : absl::StrJoin(r.sequence, " ")),
        ",", r.total_in_s, ",", r.user_in_s, ",", r.total_in_d, ",",
        r.user_in_d, ",",
        internal::CsvField(internal::ContextsArray(r, report.redacted)), ",",
        internal::CsvField(internal::FixedArray(r.perplexities)));
    if (annotated) {
      if (!r.public_comparison) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", i, " lacks public comparison columns"));
      }
      absl::StrAppend(
          &line, ",",
          internal::CsvField(internal::FixedArray(r.public_comparison->pp_public)),
          ",",
          internal::CsvField(internal::FixedArray(r.public_comparison->log_ratio)),
          ",", r.public_comparison->plausibly_public ? "true" : "false");
    }
    line += '\n';
    LEAKAUDIT_ASSIGN_OR_RETURN(n, internal::WriteOut(out, line, i + 1));
    bytes += n;
  }
  return bytes;
}

inline nlohmann::ordered_json RowToJson(const ReportRow& r, bool redacted) {
  nlohmann::ordered_json j;
  if (redacted) {
    j["sequence"] = r.sequence_length;
  } else {
    j["sequence"] = absl::StrJoin(r.sequence, " ");
  }
  j["total_in_S"] = r.total_in_s;
  j["user_in_S"] = r.user_in_s;
  j["total_in_D"] = r.total_in_d;
  j["user_in_D"] = r.user_in_d;
  if (redacted) {
    j["contexts"] = r.context_lengths;
  } else {
    auto& ctx = j["contexts"] = nlohmann::ordered_json::array();
    for (const auto& c : r.contexts) ctx.push_back(absl::StrJoin(c, " "));
  }
  j["perplexities"] = r.perplexities;
  if (!redacted) j["owners"] = r.owners;
  if (r.public_comparison) {
    j["pp_public"] = r.public_comparison->pp_public;
    j["log_ratio"] = r.public_comparison->log_ratio;
    j["plausibly_public"] = r.public_comparison->plausibly_public;
  }
  if (redacted) j["redacted"] = true;
  return j;
}

inline absl::StatusOr<std::size_t> ExportJsonl(const LeakageReport& report,
                                               std::ostream& out) {
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    LEAKAUDIT_ASSIGN_OR_RETURN(
        auto n,
        internal::WriteOut(
            out, RowToJson(report.rows[i], report.redacted).dump() + "\n",
            i + 1));
    bytes += n;
  }
  return bytes;
}

inline absl::StatusOr<std::size_t> ExportReport(const LeakageReport& report,
                                                ReportFormat format,
                                                std::ostream& out) {
  return format == ReportFormat::kCsv ? ExportCsv(report, out)
                                      : ExportJsonl(report, out);
}

inline absl::StatusOr<LeakageReport> ImportCsv(std::istream& in) {
  LeakageReport report;
  std::vector<std::string> fields;
  LEAKAUDIT_ASSIGN_OR_RETURN(bool any, internal::ReadCsvRecord(in, &fields));
  const std::string base(kCsvHeader);
  const std::string annotated_header =
      absl::StrCat(kCsvHeader, kCsvAnnotationHeader);
  const std::string header = any ? absl::StrJoin(fields, ",") : "";
  if (header != base && header != annotated_header) {
    return absl::InvalidArgumentError("unexpected CSV header");
  }
  const bool annotated = header == annotated_header;
  const std::size_t width = annotated ? 10 : 7;
  bool first = true;
  for (std::size_t line = 2;; ++line) {
    LEAKAUDIT_ASSIGN_OR_RETURN(bool more, internal::ReadCsvRecord(in, &fields));
    if (!more) break;
    auto bad = [line](absl::string_view what) {
      return absl::InvalidArgumentError(
          absl::StrCat("CSV line ", line, ": ", what));
    };
    if (fields.size() != width) return bad("wrong field count");
    ReportRow r;
    auto contexts = nlohmann::json::parse(fields[5], nullptr, false);
    auto pps = nlohmann::json::parse(fields[6], nullptr, false);
    if (!contexts.is_array() || !pps.is_array() || contexts.empty()) {
      return bad("malformed contexts or perplexities");
    }
    const bool redacted = contexts.front().is_number_unsigned();
    if (!first && redacted != report.redacted) {
      return bad("mixed redacted and plain rows");
    }
    report.redacted = redacted;
    first = false;
    try {
      if (redacted) {
        LEAKAUDIT_ASSIGN_OR_RETURN(auto len, internal::ParseCount(fields[0]));
        r.sequence_length = len;
        for (const auto& c : contexts) {
          r.context_lengths.push_back(c.get<std::size_t>());
        }
      } else {
        r.sequence = internal::SplitTokens(fields[0]);
        r.sequence_length = r.sequence.size();
        for (const auto& c : contexts) {
          r.contexts.push_back(internal::SplitTokens(c.get<std::string>()));
          r.context_lengths.push_back(r.contexts.back().size());
        }
      }
      r.perplexities = pps.get<std::vector<double>>();
      if (annotated) {
        PublicComparison pc;
        pc.pp_public = nlohmann::json::parse(fields[7]).get<std::vector<double>>();
        pc.log_ratio = nlohmann::json::parse(fields[8]).get<std::vector<double>>();
        if (fields[9] != "true" && fields[9] != "false") {
          return bad("plausibly_public must be true or false");
        }
        pc.plausibly_public = fields[9] == "true";
        r.public_comparison = std::move(pc);
      }
    } catch (const nlohmann::json::exception& e) {
      return bad(e.what());
    }
    LEAKAUDIT_ASSIGN_OR_RETURN(r.total_in_s, internal::ParseCount(fields[1]));
    LEAKAUDIT_ASSIGN_OR_RETURN(r.user_in_s, internal::ParseCount(fields[2]));
    LEAKAUDIT_ASSIGN_OR_RETURN(r.total_in_d, internal::ParseCount(fields[3]));
    LEAKAUDIT_ASSIGN_OR_RETURN(r.user_in_d, internal::ParseCount(fields[4]));
    if (auto st = ValidateRow(r); !st.ok()) return bad(st.message());
    report.rows.push_back(std::move(r));
  }
  return report;
}

inline absl::StatusOr<LeakageReport> ImportJsonl(std::istream& in) {
  LeakageReport report;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto bad = [line_no](absl::string_view what) {
      return absl::InvalidArgumentError(
          absl::StrCat("JSONL line ", line_no, ": ", what));
    };
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object()) return bad("not a JSON object");
    try {
      const bool redacted = j.value("redacted", false);
      if (!first && redacted != report.redacted) {
        return bad("mixed redacted and plain rows");
      }
      report.redacted = redacted;
      first = false;
      ReportRow r;
      if (redacted) {
        r.sequence_length = j.at("sequence").get<std::size_t>();
        r.context_lengths = j.at("contexts").get<std::vector<std::size_t>>();
      } else {
        r.sequence = internal::SplitTokens(j.at("sequence").get<std::string>());
        r.sequence_length = r.sequence.size();
        for (const auto& c : j.at("contexts")) {
          r.contexts.push_back(internal::SplitTokens(c.get<std::string>()));
          r.context_lengths.push_back(r.contexts.back().size());
        }
        r.owners = j.value("owners", std::vector<std::string>{});
      }
      r.total_in_s = j.at("total_in_S").get<std::uint64_t>();
      r.user_in_s = j.at("user_in_S").get<std::uint64_t>();
      r.total_in_d = j.at("total_in_D").get<std::uint64_t>();
      r.user_in_d = j.at("user_in_D").get<std::uint64_t>();
      r.perplexities = j.at("perplexities").get<std::vector<double>>();
      if (j.contains("pp_public")) {
        PublicComparison pc;
        pc.pp_public = j.at("pp_public").get<std::vector<double>>();
        pc.log_ratio = j.at("log_ratio").get<std::vector<double>>();
        pc.plausibly_public = j.at("plausibly_public").get<bool>();
        r.public_comparison = std::move(pc);
      }
      if (auto st = ValidateRow(r); !st.ok()) return bad(st.message());
      report.rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      return bad(e.what());
    }
  }
  return report;
}

inline absl::StatusOr<LeakageReport> ImportReport(std::istream& in,
                                                  ReportFormat format) {
  return format == ReportFormat::kCsv ? ImportCsv(in) : ImportJsonl(in);
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_REPORT_IO_H_
