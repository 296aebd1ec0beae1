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

#include "dpledger/service.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include "dpledger/error.h"

namespace dpledger {

namespace {

constexpr int kStateVersion = 1;

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kStorage, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json ParseJsonFile(const std::filesystem::path& path, ErrorCode code) {
  Json j = Json::parse(ReadText(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) Fail(code, "'" + path.string() + "' is not valid JSON");
  return j;
}

void SyncDir(const std::filesystem::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

// Write-to-temp, fsync, rename, fsync directory.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) Fail(ErrorCode::kStorage, "cannot write '" + tmp.string() + "'");
  const char* p = contents.data();
  std::size_t left = contents.size();
  bool ok = true;
  while (left > 0) {
    ssize_t w = ::write(fd, p, left);
    if (w < 0) {
      if (errno == EINTR) continue;
      ok = false;
      break;
    }
    p += w;
    left -= static_cast<std::size_t>(w);
  }
  ok = ok && ::fsync(fd) == 0;
  ::close(fd);
  if (!ok || ::rename(tmp.c_str(), path.c_str()) != 0) {
    Fail(ErrorCode::kStorage, "cannot write '" + path.string() + "'");
  }
  SyncDir(path.parent_path());
}

void RemoveFileDurably(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (ec) Fail(ErrorCode::kStorage, "cannot remove '" + path.string() + "'");
  SyncDir(path.parent_path());
}

Json BudgetToJson(const BudgetState& b) {
  Json j;
  j["epsilon_budget"] = b.epsilon_budget;
  j["delta_budget"] = b.delta_budget;
  j["epsilon_spent"] = b.epsilon_spent;
  j["delta_spent"] = b.delta_spent;
  j["naive_epsilon_total"] = b.naive_epsilon_total;
  j["naive_delta_total"] = b.naive_delta_total;
  j["query_count"] = b.query_count;
  return j;
}

BudgetState BudgetFromJson(const Json& j) {
  BudgetState b;
  b.epsilon_budget = RequireNumber(j, "epsilon_budget");
  b.delta_budget = RequireNumber(j, "delta_budget");
  b.epsilon_spent = RequireNumber(j, "epsilon_spent");
  b.delta_spent = RequireNumber(j, "delta_spent");
  b.naive_epsilon_total = RequireNumber(j, "naive_epsilon_total");
  b.naive_delta_total = RequireNumber(j, "naive_delta_total");
  b.query_count = j.at("query_count").get<std::uint64_t>();
  return b;
}

Json AccountsToJson(const std::vector<Account>& accounts) {
  Json arr = Json::array();
  for (const Account& a : accounts) {
    arr.push_back({{"id", a.id}, {"balance", a.balance}});
  }
  return arr;
}

std::vector<Account> AccountsFromJson(const Json& j) {
  std::vector<Account> out;
  for (const Json& a : j) {
    out.push_back({RequireString(a, "id"), RequireNumber(a, "balance")});
  }
  return out;
}

std::int64_t NowMillis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ServiceConfig ParseConfig(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) {
    Fail(ErrorCode::kInvalidArgument, "config must be a JSON object");
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  ServiceConfig c;
  c.dataset_path = resolve(RequireString(j, "dataset"));
  c.schema = SchemaFromJson(j.at("schema"));
  if (!j.contains("budget")) {
    Fail(ErrorCode::kInvalidArgument, "config needs a 'budget' object");
  }
  c.epsilon_budget = RequireNumber(j["budget"], "epsilon");
  c.delta_budget = RequireNumber(j["budget"], "delta");
  if (auto it = j.find("fees"); it != j.end()) {
    if (it->contains("base_fee")) c.fees.base_fee = RequireNumber(*it, "base_fee");
    if (it->contains("per_byte_fee")) {
      c.fees.per_byte_fee = RequireNumber(*it, "per_byte_fee");
    }
    if (!(c.fees.base_fee >= 0.0) || !(c.fees.per_byte_fee >= 0.0)) {
      Fail(ErrorCode::kInvalidArgument, "fees must be non-negative");
    }
  }
  if (auto it = j.find("accounts"); it != j.end()) {
    for (const Json& a : *it) {
      AccountConfig ac;
      if (a.contains("id") && !a["id"].is_null()) ac.id = RequireString(a, "id");
      ac.balance = RequireNumber(a, "balance");
      if (!(ac.balance >= 0.0)) {
        Fail(ErrorCode::kInvalidArgument, "account balance must be >= 0");
      }
      c.accounts.push_back(std::move(ac));
    }
  }
  if (auto it = j.find("listen"); it != j.end()) {
    const std::string& listen = RequireString(j, "listen");
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) {
      Fail(ErrorCode::kInvalidArgument, "listen must be host:port");
    }
    c.listen_host = listen.substr(0, colon);
    try {
      c.listen_port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidArgument, "bad listen port in '" + listen + "'");
    }
  }
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) {
      Fail(ErrorCode::kInvalidArgument, "seed must be a non-negative integer");
    }
    c.seed = it->get<std::uint64_t>();
  }
  c.data_dir = resolve(j.contains("data_dir") ? RequireString(j, "data_dir")
                                              : std::string("data"));
  return c;
}

ServiceConfig LoadConfig(const std::filesystem::path& path) {
  Json j = ParseJsonFile(path, ErrorCode::kInvalidArgument);
  try {
    return ParseConfig(j, path.parent_path());
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kInvalidArgument,
         "config '" + path.string() + "': " + e.what());
  }
}

Json RequestToJson(const QueryRequest& req) {
  Json j;
  j["account_id"] = req.account_id;
  j["descriptor"] = DescriptorToJson(req.descriptor);
  j["epsilon"] = req.epsilon;
  j["delta"] = req.delta;
  return j;
}

QueryRequest RequestFromJson(const Json& j) {
  if (!j.is_object()) {
    Fail(ErrorCode::kInvalidArgument, "request must be a JSON object");
  }
  QueryRequest req;
  req.account_id = RequireString(j, "account_id");
  if (!j.contains("descriptor")) {
    Fail(ErrorCode::kInvalidArgument, "field 'descriptor' is required");
  }
  req.descriptor = DescriptorFromJson(j["descriptor"]);
  req.epsilon = RequireNumber(j, "epsilon");
  req.delta = RequireNumber(j, "delta");
  return req;
}

Json ResponseToJson(const QueryResponse& r) {
  Json j;
  j["query_id"] = r.query_id;
  j["query_type"] = r.query_type;
  j["noisy_response"] = r.noisy_response;
  j["sigma"] = r.sigma;
  j["blockchain_price"] = r.blockchain_price;
  j["privacy_cost_epsilon"] = r.privacy_cost_epsilon;
  j["privacy_cost_delta"] = r.privacy_cost_delta;
  j["remaining_budget_epsilon"] = r.remaining_budget_epsilon;
  j["reuse_kind"] = ReuseKindName(r.reuse_kind);
  j["record_index"] = r.record_index;
  j["query_key"] = r.query_key;
  return j;
}

Json RecordToJson(const ReleaseRecord& r) {
  return Json::parse(SerializeRecordLine(r));
}

Json StateToJson(const PersistedState& s) {
  Json j;
  j["version"] = kStateVersion;
  j["applied_records"] = s.applied_records;
  j["initial_accounts"] = AccountsToJson(s.initial_accounts);
  j["accounts"] = AccountsToJson(s.accounts);
  j["initial_budget"] = BudgetToJson(s.initial_budget);
  j["budget"] = BudgetToJson(s.budget);
  return j;
}

PersistedState StateFromJson(const Json& j) {
  try {
    if (j.at("version").get<int>() != kStateVersion) {
      Fail(ErrorCode::kCorrupt, "unsupported state version");
    }
    PersistedState s;
    s.applied_records = j.at("applied_records").get<std::uint64_t>();
    s.initial_accounts = AccountsFromJson(j.at("initial_accounts"));
    s.accounts = AccountsFromJson(j.at("accounts"));
    s.initial_budget = BudgetFromJson(j.at("initial_budget"));
    s.budget = BudgetFromJson(j.at("budget"));
    return s;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kCorrupt, std::string("malformed state: ") + e.what());
  } catch (const Error& e) {
    Fail(ErrorCode::kCorrupt, std::string("malformed state: ") + e.what());
  }
}

PersistedState ReplayLedger(const PersistedState& initial,
                            const std::vector<ReleaseRecord>& records) {
  PersistedState s;
  s.initial_accounts = initial.initial_accounts;
  s.initial_budget = initial.initial_budget;
  s.accounts = initial.initial_accounts;
  s.budget = initial.initial_budget;
  for (const ReleaseRecord& r : records) {
    auto it = std::find_if(s.accounts.begin(), s.accounts.end(),
                           [&](const Account& a) { return a.id == r.account_id; });
    if (it == s.accounts.end()) {
      Fail(ErrorCode::kCorrupt, "record " + std::to_string(r.index) +
                                    " names unknown account " + r.account_id);
    }
    try {
      *it = Debit(*it, r.fee);
      s.budget = Charge(s.budget, {r.charged_epsilon, r.charged_delta},
                        {r.requested_epsilon, r.requested_delta});
    } catch (const Error& e) {
      Fail(ErrorCode::kCorrupt, "record " + std::to_string(r.index) +
                                    " cannot be replayed: " + e.what());
    }
  }
  s.applied_records = records.size();
  return s;
}

std::filesystem::path QueryService::LedgerPath(const std::filesystem::path& dir) {
  return dir / "ledger.log";
}
std::filesystem::path QueryService::StatePath(const std::filesystem::path& dir) {
  return dir / "state.json";
}
std::filesystem::path QueryService::JournalPath(
    const std::filesystem::path& dir) {
  return dir / "journal.json";
}

QueryService::QueryService(ServiceConfig config, Dataset dataset, Ledger ledger,
                           PersistedState state)
    : config_(std::move(config)),
      dataset_(std::move(dataset)),
      ledger_(std::move(ledger)),
      state_(std::move(state)),
      history_(BuildHistoryIndex(ledger_.records())) {}

std::unique_ptr<QueryService> QueryService::Open(const ServiceConfig& config) {
  Dataset dataset = LoadCsv(config.dataset_path, config.schema);
  const auto& dir = config.data_dir;
  std::filesystem::create_directories(dir);

  PersistedState state;
  if (std::filesystem::exists(StatePath(dir))) {
    state = StateFromJson(ParseJsonFile(StatePath(dir), ErrorCode::kCorrupt));
  } else {
    if (std::filesystem::exists(LedgerPath(dir)) &&
        std::filesystem::file_size(LedgerPath(dir)) > 0) {
      Fail(ErrorCode::kCorrupt, "ledger present but state file missing in '" +
                                    dir.string() + "'");
    }
    state.initial_budget = NewBudget(config.epsilon_budget, config.delta_budget);
    std::unordered_set<std::string> ids;
    for (const AccountConfig& a : config.accounts) {
      Account acct{a.id.value_or(NewAccountId()), a.balance};
      if (acct.id.empty() || !ids.insert(acct.id).second) {
        Fail(ErrorCode::kInvalidArgument,
             "account ids must be unique and non-empty");
      }
      state.initial_accounts.push_back(std::move(acct));
    }
    state.accounts = state.initial_accounts;
    state.budget = state.initial_budget;
    WriteFileAtomic(StatePath(dir), StateToJson(state).dump(2));
  }

  Ledger ledger = Ledger::Open(LedgerPath(dir));

  if (std::filesystem::exists(JournalPath(dir))) {
    Json journal = ParseJsonFile(JournalPath(dir), ErrorCode::kCorrupt);
    std::uint64_t pending = 0;
    PersistedState prior;
    try {
      pending = journal.at("pending_index").get<std::uint64_t>();
      prior = StateFromJson(journal.at("prior"));
    } catch (const Json::exception& e) {
      Fail(ErrorCode::kCorrupt, std::string("malformed journal: ") + e.what());
    }
    if (ledger.size() == pending) {
      // Never committed: undo the debit and charge.
      state = prior;
      WriteFileAtomic(StatePath(dir), StateToJson(state).dump(2));
    } else if (ledger.size() == pending + 1) {
      if (state.applied_records != ledger.size()) {
        state = ReplayLedger(prior, ledger.records());
        WriteFileAtomic(StatePath(dir), StateToJson(state).dump(2));
      }
    } else {
      Fail(ErrorCode::kCorrupt, "journal does not match the ledger length");
    }
    RemoveFileDurably(JournalPath(dir));
  }

  if (state.applied_records != ledger.size()) {
    Fail(ErrorCode::kCorrupt,
         "state reflects " + std::to_string(state.applied_records) +
             " records but the ledger holds " + std::to_string(ledger.size()));
  }
  if (ReplayLedger(state, ledger.records()) != state) {
    Fail(ErrorCode::kCorrupt, "persisted balances or budget disagree with the ledger");
  }

  auto service = std::unique_ptr<QueryService>(new QueryService(
      config, std::move(dataset), std::move(ledger), std::move(state)));
  service->ledger_.set_mid_write_hook(
      [raw = service.get()] { raw->Hook(CommitStage::kMidLedgerWrite); });
  return service;
}

void QueryService::set_fault_hook(std::function<void(CommitStage)> hook) {
  std::unique_lock lock(mu_);
  fault_hook_ = std::move(hook);
}

void QueryService::Hook(CommitStage stage) const {
  if (fault_hook_) fault_hook_(stage);
}

QueryResponse QueryService::SubmitQuery(const QueryRequest& req) {
  const PrivacyParams params{req.epsilon, req.delta};
  params.Validate();
  Validate(req.descriptor, dataset_.schema());

  std::unique_lock lock(mu_);
  auto account = std::find_if(
      state_.accounts.begin(), state_.accounts.end(),
      [&](const Account& a) { return a.id == req.account_id; });
  if (account == state_.accounts.end()) {
    Fail(ErrorCode::kNotFound, "unknown account '" + req.account_id + "'");
  }

  const Sensitivity sens =
      SensitivityOf(req.descriptor, dataset_.schema(), std::max<std::int64_t>(
                                                           dataset_.size(), 1));
  const Sigma sigma = ComputeSigma(params, sens);
  const Digest key = CanonicalKey(req.descriptor);
  const ReuseDecision decision = Decide(key, sigma, history_);

  ReleaseRecord draft;
  draft.index = ledger_.size();
  draft.query_id = FormatQueryId(draft.index);
  draft.query_key = key;
  draft.descriptor = req.descriptor;
  draft.account_id = req.account_id;
  draft.fee = PriceOf(config_.fees, CanonicalBytes(draft).size());

  // Money before privacy budget: a broke account learns nothing about the
  // budget.
  const Account debited = Debit(*account, draft.fee);
  const PrivacyCost actual = ChargeOf(decision, params, sens);
  const BudgetState charged =
      Charge(state_.budget, actual, {params.epsilon, params.delta});

  std::optional<double> true_value;
  if (NeedsTrueValue(decision)) true_value = Evaluate(req.descriptor, dataset_);
  Rng rng = config_.seed ? Rng(*config_.seed, draft.index) : Rng::FromEntropy();
  const Release release = Execute(decision, true_value, params, sens, rng);

  draft.sigma = release.sigma.value;
  draft.noisy_answer = release.answer;
  draft.reuse_kind = KindOf(decision);
  draft.base_record_index = BaseRecordIndex(decision);
  draft.requested_epsilon = params.epsilon;
  draft.requested_delta = params.delta;
  draft.charged_epsilon = release.charged_epsilon;
  draft.charged_delta = release.charged_delta;
  draft.timestamp_ms = NowMillis();

  PersistedState next = state_;
  next.accounts[account - state_.accounts.begin()] = debited;
  next.budget = charged;
  next.applied_records = draft.index + 1;

  const auto& dir = config_.data_dir;
  Hook(CommitStage::kBeforeJournal);
  Json journal;
  journal["pending_index"] = draft.index;
  journal["prior"] = StateToJson(state_);
  WriteFileAtomic(JournalPath(dir), journal.dump(2));
  Hook(CommitStage::kAfterJournal);
  const ReleaseRecord* stored = nullptr;
  try {
    WriteFileAtomic(StatePath(dir), StateToJson(next).dump(2));
    Hook(CommitStage::kAfterStateWrite);
    stored = &ledger_.Append(draft);
  } catch (const Error&) {
    // Roll the state file back; if that fails too, the journal still lets
    // the next Open() do it.
    try {
      WriteFileAtomic(StatePath(dir), StateToJson(state_).dump(2));
      RemoveFileDurably(JournalPath(dir));
    } catch (const Error&) {
    }
    throw;
  }
  Hook(CommitStage::kAfterLedgerAppend);
  // Committed. A leftover journal is resolved as committed on restart.
  try {
    RemoveFileDurably(JournalPath(dir));
  } catch (const Error&) {
  }
  Hook(CommitStage::kAfterJournalClear);

  state_ = std::move(next);
  history_.Add(stored->query_key,
               {stored->index, stored->sigma, stored->noisy_answer});

  QueryResponse resp;
  resp.query_id = stored->query_id;
  resp.query_type = Render(stored->descriptor);
  resp.noisy_response = stored->noisy_answer;
  resp.sigma = stored->sigma;
  resp.blockchain_price = stored->fee;
  resp.privacy_cost_epsilon = stored->charged_epsilon;
  resp.privacy_cost_delta = stored->charged_delta;
  resp.remaining_budget_epsilon = state_.budget.remaining_epsilon();
  resp.reuse_kind = stored->reuse_kind;
  resp.record_index = stored->index;
  resp.query_key = ToHex(stored->query_key);
  return resp;
}

Account QueryService::GetAccount(const std::string& id) const {
  std::shared_lock lock(mu_);
  for (const Account& a : state_.accounts) {
    if (a.id == id) return a;
  }
  Fail(ErrorCode::kNotFound, "unknown account '" + id + "'");
}

std::vector<Account> QueryService::ListAccounts() const {
  std::shared_lock lock(mu_);
  return state_.accounts;
}

BudgetView QueryService::GetBudget() const {
  std::shared_lock lock(mu_);
  return {state_.budget, Report(state_.budget)};
}

std::vector<ReleaseRecord> QueryService::GetHistory(
    const std::optional<Digest>& key) const {
  std::shared_lock lock(mu_);
  if (key) return ledger_.History(*key);
  return ledger_.records();
}

VerifyResult QueryService::VerifyLedger() const {
  std::shared_lock lock(mu_);
  return ledger_.Verify();
}

ServiceMeta QueryService::Meta() const {
  std::shared_lock lock(mu_);
  return {dataset_.schema(), dataset_.size(), config_.fees,
          state_.budget.epsilon_budget, state_.budget.delta_budget};
}

PersistedState QueryService::SnapshotState() const {
  std::shared_lock lock(mu_);
  return state_;
}

}  // namespace dpledger
