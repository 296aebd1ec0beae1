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

#ifndef DPLEDGER_DATASET_H_
#define DPLEDGER_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "dpledger/query.h"
#include "dpledger/schema.h"

namespace dpledger {

// Immutable numeric table. Reuse recovers old noise as (old answer - true
// answer), which is only valid while the data never changes, so there is no
// mutating API.
class Dataset {
 public:
  // Throws Error(kDataError) if any value lies outside its column bounds.
  Dataset(Schema schema, std::vector<std::vector<double>> rows);

  const Schema& schema() const { return schema_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::int64_t size() const { return static_cast<std::int64_t>(rows_.size()); }

 private:
  Schema schema_;
  std::vector<std::vector<double>> rows_;
};

// Comma-separated, header first, decimal numerics. The header must list the
// schema columns in declaration order. Errors (kDataError) name the 1-based
// line and the column.
Dataset LoadCsv(const std::filesystem::path& path, const Schema& schema);
Dataset ParseCsv(std::istream& in, const Schema& schema);

// Exact answer over rows matching the predicate. Throws
// Error(kEmptySelection) for MEAN over zero matching rows.
double Evaluate(const QueryDescriptor& desc, const Dataset& ds);

}  // namespace dpledger

#endif  // DPLEDGER_DATASET_H_
