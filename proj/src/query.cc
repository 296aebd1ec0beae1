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

#include "dpledger/query.h"

#include <cmath>
#include <sstream>

#include "dpledger/error.h"

namespace dpledger {

std::string_view QueryKindName(QueryKind kind) {
  switch (kind) {
    case QueryKind::kCount:
      return "COUNT";
    case QueryKind::kSum:
      return "SUM";
    case QueryKind::kMean:
      return "MEAN";
  }
  return "?";
}

std::optional<QueryKind> ParseQueryKind(std::string_view name) {
  if (name == "COUNT") return QueryKind::kCount;
  if (name == "SUM") return QueryKind::kSum;
  if (name == "MEAN") return QueryKind::kMean;
  return std::nullopt;
}

std::string_view ComparatorSymbol(Comparator op) {
  switch (op) {
    case Comparator::kLess:
      return "<";
    case Comparator::kLessEqual:
      return "<=";
    case Comparator::kEqual:
      return "=";
    case Comparator::kGreaterEqual:
      return ">=";
    case Comparator::kGreater:
      return ">";
  }
  return "?";
}

std::optional<Comparator> ParseComparator(std::string_view symbol) {
  if (symbol == "<") return Comparator::kLess;
  if (symbol == "<=" || symbol == "≤") return Comparator::kLessEqual;
  if (symbol == "=" || symbol == "==") return Comparator::kEqual;
  if (symbol == ">=" || symbol == "≥") return Comparator::kGreaterEqual;
  if (symbol == ">") return Comparator::kGreater;
  return std::nullopt;
}

bool Compare(double value, Comparator op, double constant) {
  switch (op) {
    case Comparator::kLess:
      return value < constant;
    case Comparator::kLessEqual:
      return value <= constant;
    case Comparator::kEqual:
      return value == constant;
    case Comparator::kGreaterEqual:
      return value >= constant;
    case Comparator::kGreater:
      return value > constant;
  }
  return false;
}

void Validate(const QueryDescriptor& desc, const Schema& schema) {
  if (desc.kind == QueryKind::kCount) {
    if (desc.column.has_value()) {
      Fail(ErrorCode::kInvalidArgument,
           "COUNT does not take a column; filter with a predicate instead");
    }
  } else {
    if (!desc.column.has_value()) {
      Fail(ErrorCode::kInvalidArgument,
           std::string(QueryKindName(desc.kind)) + " requires a column");
    }
    if (schema.Find(*desc.column) == nullptr) {
      Fail(ErrorCode::kInvalidArgument, "unknown column '" + *desc.column + "'");
    }
  }
  if (desc.predicate.has_value()) {
    if (schema.Find(desc.predicate->column) == nullptr) {
      Fail(ErrorCode::kInvalidArgument,
           "unknown predicate column '" + desc.predicate->column + "'");
    }
    if (!std::isfinite(desc.predicate->constant)) {
      Fail(ErrorCode::kInvalidArgument, "predicate constant must be finite");
    }
  }
}

std::string Render(const QueryDescriptor& desc) {
  std::ostringstream out;
  out.precision(17);
  out << QueryKindName(desc.kind) << '(';
  out << (desc.column ? *desc.column : "*") << ')';
  if (desc.predicate) {
    out << " WHERE " << desc.predicate->column << ' '
        << ComparatorSymbol(desc.predicate->op) << ' '
        << desc.predicate->constant;
  }
  return out.str();
}

Digest CanonicalKey(const QueryDescriptor& desc) {
  CanonicalWriter w;
  w.Str("dpledger.query.v1");
  w.U8(static_cast<std::uint8_t>(desc.kind));
  w.U8(desc.column.has_value() ? 1 : 0);
  if (desc.column) w.Str(*desc.column);
  w.U8(desc.predicate.has_value() ? 1 : 0);
  if (desc.predicate) {
    w.Str(desc.predicate->column);
    w.U8(static_cast<std::uint8_t>(desc.predicate->op));
    // -0.0 and 0.0 select the same rows.
    double c = desc.predicate->constant == 0.0 ? 0.0 : desc.predicate->constant;
    w.F64(c);
  }
  return w.Hash();
}

}  // namespace dpledger
