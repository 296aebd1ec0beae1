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

#include "dpledger/schema.h"

#include <cmath>
#include <unordered_set>

#include "dpledger/error.h"

namespace dpledger {

Schema::Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
  std::unordered_set<std::string> seen;
  for (const ColumnSpec& c : columns_) {
    if (c.name.empty()) {
      Fail(ErrorCode::kInvalidArgument, "column name must not be empty");
    }
    if (!seen.insert(c.name).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate column '" + c.name + "'");
    }
    if (!std::isfinite(c.lo) || !std::isfinite(c.hi) || c.lo > c.hi) {
      Fail(ErrorCode::kInvalidArgument,
           "column '" + c.name + "' needs finite bounds with lo <= hi");
    }
  }
}

std::optional<std::size_t> Schema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

const ColumnSpec* Schema::Find(std::string_view name) const {
  auto i = IndexOf(name);
  return i ? &columns_[*i] : nullptr;
}

}  // namespace dpledger
