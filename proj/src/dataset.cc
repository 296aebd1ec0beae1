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

#include "dpledger/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "dpledger/error.h"

namespace dpledger {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      return cells;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::string Where(std::size_t line, const std::string& column) {
  return "line " + std::to_string(line) + ", column '" + column + "'";
}

}  // namespace

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  const auto& cols = schema_.columns();
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != cols.size()) {
      Fail(ErrorCode::kDataError,
           "row " + std::to_string(r) + " has the wrong number of values");
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double v = rows_[r][c];
      if (!(v >= cols[c].lo && v <= cols[c].hi)) {
        Fail(ErrorCode::kDataError, "row " + std::to_string(r) + ", column '" +
                                        cols[c].name + "' is out of bounds");
      }
    }
  }
}

Dataset ParseCsv(std::istream& in, const Schema& schema) {
  const auto& cols = schema.columns();
  std::string line;
  if (!std::getline(in, line)) {
    Fail(ErrorCode::kDataError, "missing header row");
  }
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  auto header = SplitCommas(line);
  bool header_ok = header.size() == cols.size();
  for (std::size_t i = 0; header_ok && i < cols.size(); ++i) {
    header_ok = header[i] == cols[i].name;
  }
  if (!header_ok) {
    std::string expected;
    for (const auto& c : cols) {
      expected += (expected.empty() ? "" : ",") + c.name;
    }
    Fail(ErrorCode::kDataError,
         "header '" + line + "' does not match schema '" + expected + "'");
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto cells = SplitCommas(line);
    if (cells.size() != cols.size()) {
      Fail(ErrorCode::kDataError, "line " + std::to_string(line_no) +
                                      ": expected " +
                                      std::to_string(cols.size()) + " values");
    }
    std::vector<double> row(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string_view cell = cells[c];
      const char* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, row[c]);
      if (cell.empty() || ec != std::errc() || ptr != end ||
          !std::isfinite(row[c])) {
        Fail(ErrorCode::kDataError,
             Where(line_no, cols[c].name) + ": '" + std::string(cell) +
                 "' is not a number");
      }
      if (row[c] < cols[c].lo || row[c] > cols[c].hi) {
        Fail(ErrorCode::kDataError, Where(line_no, cols[c].name) + ": value " +
                                        std::string(cell) + " outside [" +
                                        std::to_string(cols[c].lo) + ", " +
                                        std::to_string(cols[c].hi) + "]");
      }
    }
    rows.push_back(std::move(row));
  }
  return Dataset(schema, std::move(rows));
}

Dataset LoadCsv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) {
    Fail(ErrorCode::kDataError, "cannot open dataset '" + path.string() + "'");
  }
  return ParseCsv(in, schema);
}

double Evaluate(const QueryDescriptor& desc, const Dataset& ds) {
  Validate(desc, ds.schema());
  std::optional<std::size_t> pred_col;
  if (desc.predicate) pred_col = ds.schema().IndexOf(desc.predicate->column);
  std::optional<std::size_t> value_col;
  if (desc.column) value_col = ds.schema().IndexOf(*desc.column);

  std::int64_t matched = 0;
  double sum = 0.0;
  for (const auto& row : ds.rows()) {
    if (pred_col &&
        !Compare(row[*pred_col], desc.predicate->op, desc.predicate->constant)) {
      continue;
    }
    ++matched;
    if (value_col) sum += row[*value_col];
  }

  switch (desc.kind) {
    case QueryKind::kCount:
      return static_cast<double>(matched);
    case QueryKind::kSum:
      return sum;
    case QueryKind::kMean:
      if (matched == 0) {
        Fail(ErrorCode::kEmptySelection, "MEAN over zero matching rows");
      }
      return sum / static_cast<double>(matched);
  }
  return 0.0;
}

}  // namespace dpledger
