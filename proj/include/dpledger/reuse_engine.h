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

#ifndef DPLEDGER_REUSE_ENGINE_H_
#define DPLEDGER_REUSE_ENGINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "dpledger/accountant.h"
#include "dpledger/digest.h"
#include "dpledger/dp_core.h"

namespace dpledger {

// Relative tolerance under which two sigmas count as the same release.
inline constexpr double kSigmaMatchTolerance = 1e-12;

enum class ReuseKind : std::uint8_t {
  kFresh = 0,
  kExactMatch = 1,
  kFullReuse = 2,
  kPartialReuse = 3,
};

std::string_view ReuseKindName(ReuseKind kind);
std::optional<ReuseKind> ParseReuseKind(std::string_view name);

struct HistoryEntry {
  std::uint64_t record_index = 0;
  double sigma = 0.0;
  double answer = 0.0;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// Prior releases grouped by query key, in ledger order, with the minimum
// sigma per key cached (earliest record wins ties).
class HistoryIndex {
 public:
  struct KeyHistory {
    std::vector<HistoryEntry> entries;
    std::size_t min_pos = 0;

    const HistoryEntry& min_entry() const { return entries[min_pos]; }
    friend bool operator==(const KeyHistory&, const KeyHistory&) = default;
  };

  // Entries must arrive in increasing record_index order.
  void Add(const Digest& key, const HistoryEntry& entry);
  const KeyHistory* Find(const Digest& key) const;
  std::size_t key_count() const { return by_key_.size(); }

  friend bool operator==(const HistoryIndex&, const HistoryIndex&) = default;

 private:
  std::map<Digest, KeyHistory> by_key_;
};

struct FreshDecision {
  Sigma sigma_new;
};

struct ExactMatchDecision {
  std::uint64_t base_record_index = 0;
  double base_answer = 0.0;
  Sigma sigma;
};

struct FullReuseDecision {
  std::uint64_t base_record_index = 0;
  double base_answer = 0.0;
  Sigma sigma_base;
  Sigma sigma_topup;
  Sigma sigma_new;
};

struct PartialReuseDecision {
  std::uint64_t base_record_index = 0;
  double base_answer = 0.0;
  Sigma sigma_base;
  double fraction = 0.0;
  Sigma sigma_extra;
  Sigma sigma_eff;
  Sigma sigma_new;
};

using ReuseDecision = std::variant<FreshDecision, ExactMatchDecision,
                                   FullReuseDecision, PartialReuseDecision>;

ReuseKind KindOf(const ReuseDecision& decision);
std::optional<std::uint64_t> BaseRecordIndex(const ReuseDecision& decision);
// Standard deviation of the noise in the answer this decision releases.
Sigma TargetSigma(const ReuseDecision& decision);
// Fresh and partial releases are built around the true answer; exact and full
// reuse only post-process an earlier release.
bool NeedsTrueValue(const ReuseDecision& decision);

// Picks how to answer a query needing noise of std `sigma_new`:
//   1. a prior release with the same sigma is returned verbatim;
//   2. if sigma_new >= the smallest prior sigma, the prior release with the
//      largest sigma <= sigma_new is topped up with independent noise;
//   3. otherwise a fraction of the smallest-sigma release's noise is reused
//      and fresh noise fills the remaining variance;
//   4. with no history the query is answered fresh.
// A sigma_new of zero (zero sensitivity) can only match exactly or go fresh.
ReuseDecision Decide(const Digest& key, Sigma sigma_new,
                     const HistoryIndex& index);

struct PartialParams {
  double fraction = 0.0;
  Sigma sigma_extra;
  Sigma sigma_eff;
};

// For 0 < sigma_new < sigma_old, reuse f * old_noise plus fresh noise of std
// sigma_extra so that f^2 sigma_old^2 + sigma_extra^2 = sigma_new^2.
// f = sigma_new^2 / sigma_old^2 minimises the leaked information, which is
// that of a fresh release at sigma_eff = sigma_extra / (1 - f), i.e.
//   1 / sigma_eff^2 = 1 / sigma_new^2 - 1 / sigma_old^2.
// Throws Error(kInvalidArgument) unless 0 < sigma_new < sigma_old.
PartialParams ComputePartialParams(Sigma sigma_new, Sigma sigma_old);

// Privacy cost of releasing under `decision`; depends only on the decision,
// not on the random draw, so it can be charged before any noise exists.
PrivacyCost ChargeOf(const ReuseDecision& decision,
                     const PrivacyParams& requested, Sensitivity sens);

struct Release {
  double answer = 0.0;
  double charged_epsilon = 0.0;
  double charged_delta = 0.0;
  ReuseDecision decision;
  Sigma sigma;
};

// Produces the answer for a decision. `true_value` is required when
// NeedsTrueValue(decision). Charges:
//   fresh          -> requested (epsilon, delta)
//   exact / full   -> (0, 0), post-processing of a released answer
//   partial        -> epsilon calibrated at sigma_eff, requested delta
// The partial-reuse charge is this library's accounting rule, not a
// published theorem; it is conservative and never exceeds the fresh charge.
Release Execute(const ReuseDecision& decision, std::optional<double> true_value,
                const PrivacyParams& requested, Sensitivity sens,
                NormalSource& rng);

}  // namespace dpledger

#endif  // DPLEDGER_REUSE_ENGINE_H_
