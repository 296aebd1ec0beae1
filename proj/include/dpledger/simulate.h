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

#ifndef DPLEDGER_SIMULATE_H_
#define DPLEDGER_SIMULATE_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dpledger/accountant.h"
#include "dpledger/ledger.h"
#include "dpledger/query.h"
#include "dpledger/service.h"

namespace dpledger {

struct WorkloadItem {
  QueryDescriptor descriptor;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t repeats = 1;
};

// CSV with header
//   kind,column,comparator,constant,epsilon,delta,repeats[,predicate_column]
// An empty comparator means no predicate. The predicate filters on
// predicate_column when given, otherwise on `column`; for COUNT `column`
// only names the predicate column.
std::vector<WorkloadItem> ParseWorkload(std::istream& in);
std::vector<WorkloadItem> LoadWorkload(const std::filesystem::path& path);

struct SimulationRow {
  std::uint64_t index = 0;
  ReuseKind reuse_kind = ReuseKind::kFresh;
  double charged_epsilon = 0.0;
  double cum_actual_epsilon = 0.0;
  double cum_naive_epsilon = 0.0;
};

// Runs every workload query, in order, through a QueryService opened on
// `config` and charged to its first account. The workload is validated in
// full before any file is created; `config.data_dir` must not already hold
// a ledger.
std::vector<SimulationRow> RunSimulation(const ServiceConfig& config,
                                         const std::vector<WorkloadItem>& workload);

inline constexpr char kSimulationCsvHeader[] =
    "index,reuse_kind,charged_epsilon,cum_actual_epsilon,cum_naive_epsilon";
void WriteSimulationCsv(std::ostream& out, const std::vector<SimulationRow>& rows);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

// Totals recomputed from ledger records alone, summed in ledger order.
CostReport ReportFromRecords(const std::vector<ReleaseRecord>& records);

}  // namespace dpledger

#endif  // DPLEDGER_SIMULATE_H_
