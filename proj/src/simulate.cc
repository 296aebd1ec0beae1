// Copyright 2026 The dpledger Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpledger/simulate.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dpledger/error.h"

namespace dpledger {

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double ParseNumber(const std::string& s, std::size_t line, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    Fail(ErrorCode::kInvalidArgument, "workload line " + std::to_string(line) +
                                          ": bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<WorkloadItem> ParseWorkload(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    Fail(ErrorCode::kInvalidArgument, "workload is empty");
  }
  auto header = SplitCsvLine(line);
  const std::vector<std::string> expected = {
      "kind", "column", "comparator", "constant", "epsilon", "delta", "repeats"};
  const bool has_pred_col =
      header.size() == expected.size() + 1 && header.back() == "predicate_column";
  if (!std::equal(expected.begin(), expected.end(), header.begin(),
                  header.begin() + std::min(header.size(), expected.size())) ||
      (header.size() != expected.size() && !has_pred_col)) {
    Fail(ErrorCode::kInvalidArgument,
         "workload header must be kind,column,comparator,constant,epsilon,"
         "delta,repeats[,predicate_column]");
  }

  std::vector<WorkloadItem> items;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = SplitCsvLine(line);
    cells.resize(header.size());
    WorkloadItem item;
    auto kind = ParseQueryKind(cells[0]);
    if (!kind) {
      Fail(ErrorCode::kInvalidArgument, "workload line " +
                                            std::to_string(line_no) +
                                            ": unknown kind '" + cells[0] + "'");
    }
    item.descriptor.kind = *kind;
    const std::string& column = cells[1];
    std::string pred_column = has_pred_col && !cells[7].empty() ? cells[7] : column;
    if (*kind != QueryKind::kCount && !column.empty()) {
      item.descriptor.column = column;
    }
    if (!cells[2].empty()) {
      auto op = ParseComparator(cells[2]);
      if (!op) {
        Fail(ErrorCode::kInvalidArgument,
             "workload line " + std::to_string(line_no) +
                 ": unknown comparator '" + cells[2] + "'");
      }
      if (pred_column.empty()) {
        Fail(ErrorCode::kInvalidArgument, "workload line " +
                                              std::to_string(line_no) +
                                              ": predicate needs a column");
      }
      item.descriptor.predicate =
          Predicate{pred_column, *op, ParseNumber(cells[3], line_no, "constant")};
    } else if (*kind == QueryKind::kCount && !column.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           "workload line " + std::to_string(line_no) +
               ": COUNT takes a column only together with a comparator");
    }
    item.epsilon = ParseNumber(cells[4], line_no, "epsilon");
    item.delta = ParseNumber(cells[5], line_no, "delta");
    double repeats = ParseNumber(cells[6], line_no, "repeats");
    if (repeats < 1 || repeats != static_cast<double>(static_cast<std::uint64_t>(repeats))) {
      Fail(ErrorCode::kInvalidArgument, "workload line " +
                                            std::to_string(line_no) +
                                            ": repeats must be an integer >= 1");
    }
    item.repeats = static_cast<std::uint64_t>(repeats);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<WorkloadItem> LoadWorkload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    Fail(ErrorCode::kInvalidArgument,
         "cannot open workload '" + path.string() + "'");
  }
  return ParseWorkload(in);
}

std::vector<SimulationRow> RunSimulation(
    const ServiceConfig& config, const std::vector<WorkloadItem>& workload) {
  for (const WorkloadItem& item : workload) {
    Validate(item.descriptor, config.schema);
    PrivacyParams{item.epsilon, item.delta}.Validate();
  }
  if (config.accounts.empty()) {
    Fail(ErrorCode::kInvalidArgument, "simulation needs at least one account");
  }
  const auto ledger_path = QueryService::LedgerPath(config.data_dir);
  if (std::filesystem::exists(ledger_path) &&
      std::filesystem::file_size(ledger_path) > 0) {
    Fail(ErrorCode::kInvalidArgument,
         "'" + config.data_dir.string() + "' already holds a ledger");
  }

  auto service = QueryService::Open(config);
  const std::string account = service->ListAccounts().front().id;
  std::vector<SimulationRow> rows;
  for (const WorkloadItem& item : workload) {
    for (std::uint64_t i = 0; i < item.repeats; ++i) {
      QueryResponse resp = service->SubmitQuery(
          {account, item.descriptor, item.epsilon, item.delta});
      BudgetView budget = service->GetBudget();
      rows.push_back({resp.record_index, resp.reuse_kind,
                      resp.privacy_cost_epsilon, budget.state.epsilon_spent,
                      budget.state.naive_epsilon_total});
    }
  }
  return rows;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void WriteSimulationCsv(std::ostream& out,
                        const std::vector<SimulationRow>& rows) {
  out << kSimulationCsvHeader << '\n';
  for (const SimulationRow& r : rows) {
    out << r.index << ',' << ReuseKindName(r.reuse_kind) << ','
        << FormatDouble(r.charged_epsilon) << ','
        << FormatDouble(r.cum_actual_epsilon) << ','
        << FormatDouble(r.cum_naive_epsilon) << '\n';
  }
}

CostReport ReportFromRecords(const std::vector<ReleaseRecord>& records) {
  double naive = 0.0;
  double actual = 0.0;
  for (const ReleaseRecord& r : records) {
    naive += r.requested_epsilon;
    actual += r.charged_epsilon;
  }
  return MakeReport(naive, actual, records.size());
}

}  // namespace dpledger
