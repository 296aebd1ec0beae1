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

#ifndef DPLEDGER_SERVICE_H_
#define DPLEDGER_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dpledger/accountant.h"
#include "dpledger/dataset.h"
#include "dpledger/dp_core.h"
#include "dpledger/json_codec.h"
#include "dpledger/ledger.h"
#include "dpledger/reuse_engine.h"

namespace dpledger {

struct AccountConfig {
  std::optional<std::string> id;
  double balance = 0.0;
};

struct ServiceConfig {
  std::filesystem::path dataset_path;
  Schema schema;
  double epsilon_budget = 0.0;
  double delta_budget = 0.0;
  FeeSchedule fees;
  std::vector<AccountConfig> accounts;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  // Fixed seed makes every release reproducible; absent means OS entropy.
  std::optional<std::uint64_t> seed;
  // Holds ledger.log, state.json and journal.json.
  std::filesystem::path data_dir;
};

// JSON config file; relative paths are resolved against the file's
// directory. Throws Error(kInvalidArgument) on malformed content.
ServiceConfig LoadConfig(const std::filesystem::path& path);
ServiceConfig ParseConfig(const Json& j, const std::filesystem::path& base_dir);

struct QueryRequest {
  std::string account_id;
  QueryDescriptor descriptor;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Everything an output card shows.
struct QueryResponse {
  std::string query_id;
  std::string query_type;
  double noisy_response = 0.0;
  double sigma = 0.0;
  double blockchain_price = 0.0;
  double privacy_cost_epsilon = 0.0;
  double privacy_cost_delta = 0.0;
  double remaining_budget_epsilon = 0.0;
  ReuseKind reuse_kind = ReuseKind::kFresh;
  std::uint64_t record_index = 0;
  std::string query_key;
};

Json RequestToJson(const QueryRequest& req);
QueryRequest RequestFromJson(const Json& j);
Json ResponseToJson(const QueryResponse& resp);
Json RecordToJson(const ReleaseRecord& record);

// Durable service state other than the ledger. `initial_*` is what the
// ledger is replayed against to rebuild the rest.
struct PersistedState {
  std::uint64_t applied_records = 0;
  std::vector<Account> initial_accounts;
  std::vector<Account> accounts;
  BudgetState initial_budget;
  BudgetState budget;

  friend bool operator==(const PersistedState&,
                         const PersistedState&) = default;
};

Json StateToJson(const PersistedState& state);
PersistedState StateFromJson(const Json& j);

// Recomputes balances and budget by replaying every record's fee and
// charges onto the initial values.
PersistedState ReplayLedger(const PersistedState& initial,
                            const std::vector<ReleaseRecord>& records);

// Points inside SubmitQuery's commit sequence, for fault injection.
enum class CommitStage {
  kBeforeJournal,
  kAfterJournal,
  kAfterStateWrite,
  kMidLedgerWrite,
  kAfterLedgerAppend,
  kAfterJournalClear,
};

struct BudgetView {
  BudgetState state;
  CostReport report;
};

struct ServiceMeta {
  Schema schema;
  std::int64_t row_count = 0;
  FeeSchedule fees;
  double epsilon_budget = 0.0;
  double delta_budget = 0.0;
};

// Orchestrates one dataset's query flow. SubmitQuery runs validate -> sigma
// -> reuse decision -> fee -> debit -> budget charge -> evaluate/execute ->
// append inside one writer section, all-or-nothing. Commit order on disk is
// journal (prior state) -> state file -> ledger line -> journal removal; the
// ledger line is the commit point and Open() rolls back anything journaled
// but not appended.
class QueryService {
 public:
  static std::unique_ptr<QueryService> Open(const ServiceConfig& config);

  QueryResponse SubmitQuery(const QueryRequest& req);

  Account GetAccount(const std::string& id) const;
  std::vector<Account> ListAccounts() const;
  BudgetView GetBudget() const;
  // All records, or those of one query key.
  std::vector<ReleaseRecord> GetHistory(const std::optional<Digest>& key) const;
  VerifyResult VerifyLedger() const;
  ServiceMeta Meta() const;
  PersistedState SnapshotState() const;

  const ServiceConfig& config() const { return config_; }

  void set_fault_hook(std::function<void(CommitStage)> hook);

  static std::filesystem::path LedgerPath(const std::filesystem::path& dir);
  static std::filesystem::path StatePath(const std::filesystem::path& dir);
  static std::filesystem::path JournalPath(const std::filesystem::path& dir);

 private:
  QueryService(ServiceConfig config, Dataset dataset, Ledger ledger,
               PersistedState state);

  void Hook(CommitStage stage) const;

  ServiceConfig config_;
  Dataset dataset_;
  mutable std::shared_mutex mu_;
  Ledger ledger_;
  PersistedState state_;
  HistoryIndex history_;
  std::function<void(CommitStage)> fault_hook_;
};

}  // namespace dpledger

#endif  // DPLEDGER_SERVICE_H_
