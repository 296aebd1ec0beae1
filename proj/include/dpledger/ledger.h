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

#ifndef DPLEDGER_LEDGER_H_
#define DPLEDGER_LEDGER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpledger/digest.h"
#include "dpledger/query.h"
#include "dpledger/reuse_engine.h"

namespace dpledger {

// One release on the chain. record_hash covers every other field through
// CanonicalBytes(); prev_hash links to the previous record (zeros at
// genesis).
struct ReleaseRecord {
  std::uint64_t index = 0;
  std::string query_id;
  Digest query_key{};
  QueryDescriptor descriptor;
  double sigma = 0.0;
  double noisy_answer = 0.0;
  ReuseKind reuse_kind = ReuseKind::kFresh;
  std::optional<std::uint64_t> base_record_index;
  double requested_epsilon = 0.0;
  double requested_delta = 0.0;
  double charged_epsilon = 0.0;
  double charged_delta = 0.0;
  double fee = 0.0;
  std::string account_id;
  std::int64_t timestamp_ms = 0;
  Digest prev_hash{};
  Digest record_hash{};

  friend bool operator==(const ReleaseRecord&, const ReleaseRecord&) = default;
};

// "Q" followed by the zero-padded ledger index, e.g. Q000042.
std::string FormatQueryId(std::uint64_t index);

// Hash pre-image: every field except record_hash, fixed order. Its length
// does not depend on the numeric field values.
std::vector<std::uint8_t> CanonicalBytes(const ReleaseRecord& r);
Digest ComputeRecordHash(const ReleaseRecord& r);

// One line of the ledger file, without the trailing newline.
std::string SerializeRecordLine(const ReleaseRecord& r);
// Strict parse; nullopt unless the line is exactly what SerializeRecordLine
// would produce for the parsed record.
std::optional<ReleaseRecord> ParseRecordLine(std::string_view line);

struct VerifyResult {
  bool ok = true;
  std::uint64_t record_count = 0;
  std::uint64_t first_bad_index = 0;
  std::string reason;
};

// Checks every line of a ledger file image: well-formed, index sequence,
// query key, record hash, and link to the predecessor. An unterminated last
// line is reported as broken.
VerifyResult VerifyLedgerBytes(std::string_view contents);
VerifyResult VerifyLedgerFile(const std::filesystem::path& path);

// Read-only load of a verified ledger file. Throws Error(kCorrupt) if
// verification fails.
std::vector<ReleaseRecord> ReadLedgerRecords(const std::filesystem::path& path);

// Fields the caller supplies; the ledger assigns index, query_id, prev_hash
// and record_hash.
using RecordDraft = ReleaseRecord;

// Append-only hash chain persisted as one JSON line per record. The file is
// the source of truth: a record exists iff its full line (with newline) is on
// disk. Not thread-safe; the owner serialises access.
class Ledger {
 public:
  // Opens or creates the ledger. A trailing partial line left by an
  // interrupted append is truncated; any other defect throws
  // Error(kCorrupt).
  static Ledger Open(const std::filesystem::path& path);

  Ledger(Ledger&& other) noexcept;
  Ledger& operator=(Ledger&& other) noexcept;
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;
  ~Ledger();

  // Fills in chain fields, writes and fsyncs the line, then returns the
  // stored record. Throws Error(kStorage) if the write fails, in which case
  // the in-memory chain is unchanged.
  const ReleaseRecord& Append(RecordDraft draft);

  // Records for one query key, ascending index.
  std::vector<ReleaseRecord> History(const Digest& key) const;
  const std::vector<ReleaseRecord>& records() const { return records_; }
  std::uint64_t size() const { return records_.size(); }
  const Digest& head_hash() const;
  const std::filesystem::path& path() const { return path_; }

  // Re-reads the file and checks the first size() records against the chain
  // rules and against the in-memory hashes. Lines appended after the call
  // started are ignored.
  VerifyResult Verify() const;

  // Test hook: invoked after the first half of a line has been written.
  void set_mid_write_hook(std::function<void()> hook) {
    mid_write_hook_ = std::move(hook);
  }

 private:
  Ledger(std::filesystem::path path, int fd,
         std::vector<ReleaseRecord> records);

  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<ReleaseRecord> records_;
  std::map<Digest, std::vector<std::size_t>> by_key_;
  std::function<void()> mid_write_hook_;
};

// Rebuilds the reuse index from a chain; equal to the index maintained
// incrementally while appending.
HistoryIndex BuildHistoryIndex(const std::vector<ReleaseRecord>& records);

struct FeeSchedule {
  double base_fee = 0.001;
  double per_byte_fee = 1e-6;
};

// base_fee + per_byte_fee * size_bytes.
double PriceOf(const FeeSchedule& schedule, std::size_t size_bytes);

struct Account {
  std::string id;
  double balance = 0.0;

  friend bool operator==(const Account&, const Account&) = default;
};

// Throws Error(kInsufficientFunds) if the fee exceeds the balance; the input
// account is never modified.
Account Debit(const Account& account, double fee);

// 20 random bytes, hex encoded.
std::string NewAccountId();

}  // namespace dpledger

#endif  // DPLEDGER_LEDGER_H_
