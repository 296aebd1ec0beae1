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

#include "dpledger/ledger.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "dpledger/error.h"
#include "dpledger/json_codec.h"

namespace dpledger {

std::string FormatQueryId(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Q%06llu",
                static_cast<unsigned long long>(index));
  return buf;
}

std::vector<std::uint8_t> CanonicalBytes(const ReleaseRecord& r) {
  CanonicalWriter w;
  w.Str("dpledger.record.v1");
  w.U64(r.index);
  w.Str(r.query_id);
  w.Bytes(r.query_key);
  // The descriptor is covered field by field, same layout as its key.
  const QueryDescriptor& d = r.descriptor;
  w.U8(static_cast<std::uint8_t>(d.kind));
  w.U8(d.column ? 1 : 0).Str(d.column ? *d.column : "");
  w.U8(d.predicate ? 1 : 0);
  w.Str(d.predicate ? d.predicate->column : "");
  w.U8(d.predicate ? static_cast<std::uint8_t>(d.predicate->op) : 0);
  w.F64(d.predicate ? d.predicate->constant : 0.0);
  w.F64(r.sigma);
  w.F64(r.noisy_answer);
  w.U8(static_cast<std::uint8_t>(r.reuse_kind));
  w.U8(r.base_record_index ? 1 : 0).U64(r.base_record_index.value_or(0));
  w.F64(r.requested_epsilon);
  w.F64(r.requested_delta);
  w.F64(r.charged_epsilon);
  w.F64(r.charged_delta);
  w.F64(r.fee);
  w.Str(r.account_id);
  w.I64(r.timestamp_ms);
  w.Bytes(r.prev_hash);
  return w.bytes();
}

Digest ComputeRecordHash(const ReleaseRecord& r) {
  return Sha256(CanonicalBytes(r));
}

std::string SerializeRecordLine(const ReleaseRecord& r) {
  Json j;
  j["index"] = r.index;
  j["query_id"] = r.query_id;
  j["query_key"] = ToHex(r.query_key);
  j["descriptor"] = DescriptorToJson(r.descriptor);
  j["sigma"] = r.sigma;
  j["noisy_answer"] = r.noisy_answer;
  j["reuse_kind"] = ReuseKindName(r.reuse_kind);
  j["base_record_index"] =
      r.base_record_index ? Json(*r.base_record_index) : Json(nullptr);
  j["requested_epsilon"] = r.requested_epsilon;
  j["requested_delta"] = r.requested_delta;
  j["charged_epsilon"] = r.charged_epsilon;
  j["charged_delta"] = r.charged_delta;
  j["fee"] = r.fee;
  j["account_id"] = r.account_id;
  j["timestamp_ms"] = r.timestamp_ms;
  j["prev_hash"] = ToHex(r.prev_hash);
  j["record_hash"] = ToHex(r.record_hash);
  return j.dump();
}

namespace {

bool GetDouble(const Json& j, const char* key, double& out) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_float()) return false;
  out = it->get<double>();
  return std::isfinite(out);
}

bool GetString(const Json& j, const char* key, std::string& out) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

bool GetDigest(const Json& j, const char* key, Digest& out) {
  std::string hex;
  return GetString(j, key, hex) && FromHex(hex, out);
}

}  // namespace

std::optional<ReleaseRecord> ParseRecordLine(std::string_view line) {
  Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  ReleaseRecord r;
  try {
    auto idx = j.find("index");
    if (idx == j.end() || !idx->is_number_unsigned()) return std::nullopt;
    r.index = idx->get<std::uint64_t>();
    if (!GetString(j, "query_id", r.query_id)) return std::nullopt;
    if (!GetDigest(j, "query_key", r.query_key)) return std::nullopt;
    auto desc = j.find("descriptor");
    if (desc == j.end()) return std::nullopt;
    r.descriptor = DescriptorFromJson(*desc);
    if (!GetDouble(j, "sigma", r.sigma)) return std::nullopt;
    if (!GetDouble(j, "noisy_answer", r.noisy_answer)) return std::nullopt;
    std::string kind;
    if (!GetString(j, "reuse_kind", kind)) return std::nullopt;
    auto parsed_kind = ParseReuseKind(kind);
    if (!parsed_kind) return std::nullopt;
    r.reuse_kind = *parsed_kind;
    auto base = j.find("base_record_index");
    if (base == j.end()) return std::nullopt;
    if (base->is_number_unsigned()) {
      r.base_record_index = base->get<std::uint64_t>();
    } else if (!base->is_null()) {
      return std::nullopt;
    }
    if (!GetDouble(j, "requested_epsilon", r.requested_epsilon) ||
        !GetDouble(j, "requested_delta", r.requested_delta) ||
        !GetDouble(j, "charged_epsilon", r.charged_epsilon) ||
        !GetDouble(j, "charged_delta", r.charged_delta) ||
        !GetDouble(j, "fee", r.fee)) {
      return std::nullopt;
    }
    if (!GetString(j, "account_id", r.account_id)) return std::nullopt;
    auto ts = j.find("timestamp_ms");
    if (ts == j.end() || !ts->is_number_integer()) return std::nullopt;
    r.timestamp_ms = ts->get<std::int64_t>();
    if (!GetDigest(j, "prev_hash", r.prev_hash)) return std::nullopt;
    if (!GetDigest(j, "record_hash", r.record_hash)) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  // Rejects every alternative spelling of the same values (key order,
  // whitespace, number formatting, duplicate keys).
  if (SerializeRecordLine(r) != line) return std::nullopt;
  return r;
}

namespace {

std::string CheckRecord(const ReleaseRecord& r, std::uint64_t expected_index,
                        const Digest& expected_prev) {
  if (r.index != expected_index) return "index out of sequence";
  if (r.query_id != FormatQueryId(r.index)) return "query id mismatch";
  if (r.prev_hash != expected_prev) return "prev_hash does not link";
  if (r.query_key != CanonicalKey(r.descriptor)) return "query key mismatch";
  if ((r.reuse_kind == ReuseKind::kFresh) == r.base_record_index.has_value()) {
    return "base record inconsistent with reuse kind";
  }
  if (r.base_record_index && *r.base_record_index >= r.index) {
    return "base record is not an earlier record";
  }
  if (ComputeRecordHash(r) != r.record_hash) return "record hash mismatch";
  return "";
}

// Verifies up to `limit` lines (all when nullopt). When `expected` is given,
// each record hash must also equal the corresponding expected record's.
VerifyResult VerifyLines(std::string_view contents,
                         std::optional<std::uint64_t> limit,
                         const std::vector<ReleaseRecord>* expected,
                         std::vector<ReleaseRecord>* parsed) {
  VerifyResult result;
  Digest prev = kZeroDigest;
  std::uint64_t i = 0;
  std::size_t pos = 0;
  auto broken = [&](std::string reason) {
    result.ok = false;
    result.first_bad_index = i;
    result.reason = std::move(reason);
    result.record_count = i;
    return result;
  };
  while (pos < contents.size() && (!limit || i < *limit)) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) return broken("unterminated record");
    auto rec = ParseRecordLine(contents.substr(pos, nl - pos));
    if (!rec) return broken("malformed record");
    std::string why = CheckRecord(*rec, i, prev);
    if (!why.empty()) return broken(std::move(why));
    if (expected && (i >= expected->size() ||
                     (*expected)[i].record_hash != rec->record_hash)) {
      return broken("record differs from the committed chain");
    }
    prev = rec->record_hash;
    if (parsed) parsed->push_back(std::move(*rec));
    pos = nl + 1;
    ++i;
  }
  if (limit && i < *limit) return broken("record missing");
  result.record_count = i;
  return result;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kStorage, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void SyncDirectory(const std::filesystem::path& dir) {
  int dfd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (dfd >= 0) {
    ::fsync(dfd);
    ::close(dfd);
  }
}

bool WriteAll(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

}  // namespace

VerifyResult VerifyLedgerBytes(std::string_view contents) {
  return VerifyLines(contents, std::nullopt, nullptr, nullptr);
}

VerifyResult VerifyLedgerFile(const std::filesystem::path& path) {
  return VerifyLedgerBytes(ReadFile(path));
}

std::vector<ReleaseRecord> ReadLedgerRecords(const std::filesystem::path& path) {
  std::vector<ReleaseRecord> records;
  VerifyResult v = VerifyLines(ReadFile(path), std::nullopt, nullptr, &records);
  if (!v.ok) {
    Fail(ErrorCode::kCorrupt, "ledger '" + path.string() + "' is broken at record " +
                                  std::to_string(v.first_bad_index) + ": " +
                                  v.reason);
  }
  return records;
}

Ledger::Ledger(std::filesystem::path path, int fd,
               std::vector<ReleaseRecord> records)
    : path_(std::move(path)), fd_(fd), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    by_key_[records_[i].query_key].push_back(i);
  }
}

Ledger::Ledger(Ledger&& other) noexcept
    : path_(std::move(other.path_)),
      fd_(std::exchange(other.fd_, -1)),
      records_(std::move(other.records_)),
      by_key_(std::move(other.by_key_)),
      mid_write_hook_(std::move(other.mid_write_hook_)) {}

Ledger& Ledger::operator=(Ledger&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(other.path_);
    fd_ = std::exchange(other.fd_, -1);
    records_ = std::move(other.records_);
    by_key_ = std::move(other.by_key_);
    mid_write_hook_ = std::move(other.mid_write_hook_);
  }
  return *this;
}

Ledger::~Ledger() {
  if (fd_ >= 0) ::close(fd_);
}

Ledger Ledger::Open(const std::filesystem::path& path) {
  const bool existed = std::filesystem::exists(path);
  std::string contents = existed ? ReadFile(path) : std::string();

  std::size_t committed = contents.rfind('\n');
  committed = committed == std::string::npos ? 0 : committed + 1;
  if (committed < contents.size()) {
    // Interrupted append: the partial line was never committed.
    std::filesystem::resize_file(path, committed);
    contents.resize(committed);
  }

  std::vector<ReleaseRecord> records;
  VerifyResult v = VerifyLines(contents, std::nullopt, nullptr, &records);
  if (!v.ok) {
    Fail(ErrorCode::kCorrupt, "ledger '" + path.string() + "' is broken at record " +
                                  std::to_string(v.first_bad_index) + ": " +
                                  v.reason);
  }

  int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    Fail(ErrorCode::kStorage, "cannot open ledger '" + path.string() +
                                  "': " + std::strerror(errno));
  }
  if (!existed) SyncDirectory(path.parent_path());
  return Ledger(path, fd, std::move(records));
}

const Digest& Ledger::head_hash() const {
  return records_.empty() ? kZeroDigest : records_.back().record_hash;
}

const ReleaseRecord& Ledger::Append(RecordDraft draft) {
  draft.index = records_.size();
  draft.query_id = FormatQueryId(draft.index);
  draft.query_key = CanonicalKey(draft.descriptor);
  draft.prev_hash = head_hash();
  draft.record_hash = ComputeRecordHash(draft);
  const std::string line = SerializeRecordLine(draft) + "\n";

  const off_t before = ::lseek(fd_, 0, SEEK_END);
  bool ok;
  if (mid_write_hook_) {
    const std::size_t half = line.size() / 2;
    ok = WriteAll(fd_, line.data(), half);
    mid_write_hook_();
    ok = ok && WriteAll(fd_, line.data() + half, line.size() - half);
  } else {
    ok = WriteAll(fd_, line.data(), line.size());
  }
  ok = ok && ::fsync(fd_) == 0;
  if (!ok) {
    const int err = errno;
    if (before >= 0 && ::ftruncate(fd_, before) != 0) {
      // The torn tail is truncated by the next Open().
    }
    Fail(ErrorCode::kStorage,
         std::string("ledger append failed: ") + std::strerror(err));
  }
  by_key_[draft.query_key].push_back(records_.size());
  records_.push_back(std::move(draft));
  return records_.back();
}

std::vector<ReleaseRecord> Ledger::History(const Digest& key) const {
  std::vector<ReleaseRecord> out;
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t i : it->second) out.push_back(records_[i]);
  return out;
}

VerifyResult Ledger::Verify() const {
  std::string contents;
  try {
    contents = ReadFile(path_);
  } catch (const Error& e) {
    VerifyResult r;
    r.ok = false;
    r.reason = e.what();
    return r;
  }
  return VerifyLines(contents, records_.size(), &records_, nullptr);
}

HistoryIndex BuildHistoryIndex(const std::vector<ReleaseRecord>& records) {
  HistoryIndex index;
  for (const ReleaseRecord& r : records) {
    index.Add(r.query_key, {r.index, r.sigma, r.noisy_answer});
  }
  return index;
}

double PriceOf(const FeeSchedule& schedule, std::size_t size_bytes) {
  return schedule.base_fee +
         schedule.per_byte_fee * static_cast<double>(size_bytes);
}

Account Debit(const Account& account, double fee) {
  if (!(fee >= 0.0)) Fail(ErrorCode::kInvalidArgument, "fee must be >= 0");
  if (fee > account.balance) {
    Fail(ErrorCode::kInsufficientFunds,
         "account " + account.id + " holds " + std::to_string(account.balance) +
             " credits, fee is " + std::to_string(fee));
  }
  Account next = account;
  next.balance -= fee;
  return next;
}

std::string NewAccountId() {
  std::random_device rd;
  std::array<std::uint8_t, 20> bytes;
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rd());
  return ToHex(bytes);
}

}  // namespace dpledger
