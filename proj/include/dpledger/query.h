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

#ifndef DPLEDGER_QUERY_H_
#define DPLEDGER_QUERY_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "dpledger/digest.h"
#include "dpledger/schema.h"

namespace dpledger {

enum class QueryKind { kCount, kSum, kMean };
enum class Comparator { kLess, kLessEqual, kEqual, kGreaterEqual, kGreater };

std::string_view QueryKindName(QueryKind kind);
std::optional<QueryKind> ParseQueryKind(std::string_view name);
std::string_view ComparatorSymbol(Comparator op);
// Accepts "<", "<=", "=", ">=", ">" and the unicode forms of <= and >=.
std::optional<Comparator> ParseComparator(std::string_view symbol);

bool Compare(double value, Comparator op, double constant);

struct Predicate {
  std::string column;
  Comparator op = Comparator::kEqual;
  double constant = 0.0;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// What is being asked. COUNT takes no column; SUM and MEAN require one. The
// optional predicate filters rows by a single-column comparison.
struct QueryDescriptor {
  QueryKind kind = QueryKind::kCount;
  std::optional<std::string> column;
  std::optional<Predicate> predicate;

  friend bool operator==(const QueryDescriptor&,
                         const QueryDescriptor&) = default;
};

// Throws Error(kInvalidArgument) when the descriptor is malformed or names a
// column the schema does not declare.
void Validate(const QueryDescriptor& desc, const Schema& schema);

// Human-readable query type, e.g. "SUM(income) WHERE age > 30".
std::string Render(const QueryDescriptor& desc);

// Reuse identity of a query. Excludes privacy parameters by construction.
Digest CanonicalKey(const QueryDescriptor& desc);

}  // namespace dpledger

#endif  // DPLEDGER_QUERY_H_
