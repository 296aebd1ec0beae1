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

#include "dpledger/json_codec.h"

#include <string>

#include "dpledger/error.h"

namespace dpledger {

double RequireNumber(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number()) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("field '") + field + "' must be a number");
  }
  return it->get<double>();
}

const std::string& RequireString(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("field '") + field + "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

Json DescriptorToJson(const QueryDescriptor& desc) {
  Json j;
  j["kind"] = QueryKindName(desc.kind);
  j["column"] = desc.column ? Json(*desc.column) : Json(nullptr);
  if (desc.predicate) {
    Json p;
    p["column"] = desc.predicate->column;
    p["op"] = ComparatorSymbol(desc.predicate->op);
    p["constant"] = desc.predicate->constant;
    j["predicate"] = std::move(p);
  } else {
    j["predicate"] = nullptr;
  }
  return j;
}

QueryDescriptor DescriptorFromJson(const Json& j) {
  if (!j.is_object()) {
    Fail(ErrorCode::kInvalidArgument, "descriptor must be an object");
  }
  QueryDescriptor desc;
  auto kind = ParseQueryKind(RequireString(j, "kind"));
  if (!kind) {
    Fail(ErrorCode::kInvalidArgument,
         "unsupported query kind '" + RequireString(j, "kind") + "'");
  }
  desc.kind = *kind;
  if (auto it = j.find("column"); it != j.end() && !it->is_null()) {
    desc.column = RequireString(j, "column");
  }
  if (auto it = j.find("predicate"); it != j.end() && !it->is_null()) {
    const Json& p = *it;
    if (!p.is_object()) {
      Fail(ErrorCode::kInvalidArgument, "predicate must be an object");
    }
    Predicate pred;
    pred.column = RequireString(p, "column");
    auto op = ParseComparator(RequireString(p, "op"));
    if (!op) {
      Fail(ErrorCode::kInvalidArgument,
           "unknown comparator '" + RequireString(p, "op") + "'");
    }
    pred.op = *op;
    pred.constant = RequireNumber(p, "constant");
    desc.predicate = std::move(pred);
  }
  return desc;
}

Json SchemaToJson(const Schema& schema) {
  Json cols = Json::array();
  for (const ColumnSpec& c : schema.columns()) {
    cols.push_back({{"name", c.name}, {"lo", c.lo}, {"hi", c.hi}});
  }
  return cols;
}

Schema SchemaFromJson(const Json& j) {
  if (!j.is_array()) {
    Fail(ErrorCode::kInvalidArgument, "schema must be an array of columns");
  }
  std::vector<ColumnSpec> cols;
  for (const Json& c : j) {
    cols.push_back(
        {RequireString(c, "name"), RequireNumber(c, "lo"), RequireNumber(c, "hi")});
  }
  return Schema(std::move(cols));
}

Json ReportToJson(const CostReport& report) {
  Json j;
  j["naive_epsilon_total"] = report.naive_epsilon_total;
  j["actual_epsilon_total"] = report.actual_epsilon_total;
  j["savings_ratio"] = report.savings_ratio;
  j["query_count"] = report.query_count;
  return j;
}

}  // namespace dpledger
