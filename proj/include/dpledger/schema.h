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

#ifndef DPLEDGER_SCHEMA_H_
#define DPLEDGER_SCHEMA_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dpledger {

struct ColumnSpec {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

// Declared public bounds for each numeric column. Sensitivities are derived
// from these bounds, never from the data.
class Schema {
 public:
  Schema() = default;
  // Throws Error(kInvalidArgument) on duplicate names, non-finite bounds or
  // lo > hi.
  explicit Schema(std::vector<ColumnSpec> columns);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }

  std::optional<std::size_t> IndexOf(std::string_view name) const;
  const ColumnSpec* Find(std::string_view name) const;

 private:
  std::vector<ColumnSpec> columns_;
};

}  // namespace dpledger

#endif  // DPLEDGER_SCHEMA_H_
