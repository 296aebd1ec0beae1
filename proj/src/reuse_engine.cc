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

#include "dpledger/reuse_engine.h"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "dpledger/error.h"

namespace dpledger {

std::string_view ReuseKindName(ReuseKind kind) {
  switch (kind) {
    case ReuseKind::kFresh:
      return "Fresh";
    case ReuseKind::kExactMatch:
      return "ExactMatch";
    case ReuseKind::kFullReuse:
      return "FullReuse";
    case ReuseKind::kPartialReuse:
      return "PartialReuse";
  }
  return "?";
}

std::optional<ReuseKind> ParseReuseKind(std::string_view name) {
  for (ReuseKind k : {ReuseKind::kFresh, ReuseKind::kExactMatch,
                      ReuseKind::kFullReuse, ReuseKind::kPartialReuse}) {
    if (ReuseKindName(k) == name) return k;
  }
  return std::nullopt;
}

void HistoryIndex::Add(const Digest& key, const HistoryEntry& entry) {
  KeyHistory& h = by_key_[key];
  if (!h.entries.empty() && h.entries.back().record_index >= entry.record_index) {
    Fail(ErrorCode::kInvalidArgument, "history entries must arrive in order");
  }
  h.entries.push_back(entry);
  if (entry.sigma < h.min_entry().sigma) h.min_pos = h.entries.size() - 1;
}

const HistoryIndex::KeyHistory* HistoryIndex::Find(const Digest& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &it->second;
}

ReuseKind KindOf(const ReuseDecision& decision) {
  return static_cast<ReuseKind>(decision.index());
}

std::optional<std::uint64_t> BaseRecordIndex(const ReuseDecision& decision) {
  return std::visit(
      [](const auto& d) -> std::optional<std::uint64_t> {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, FreshDecision>) {
          return std::nullopt;
        } else {
          return d.base_record_index;
        }
      },
      decision);
}

Sigma TargetSigma(const ReuseDecision& decision) {
  return std::visit(
      [](const auto& d) -> Sigma {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>,
                                     ExactMatchDecision>) {
          return d.sigma;
        } else {
          return d.sigma_new;
        }
      },
      decision);
}

bool NeedsTrueValue(const ReuseDecision& decision) {
  ReuseKind k = KindOf(decision);
  return k == ReuseKind::kFresh || k == ReuseKind::kPartialReuse;
}

namespace {

bool SameSigma(double a, double b) {
  return std::abs(a - b) <= kSigmaMatchTolerance * std::max(a, b);
}

}  // namespace

PartialParams ComputePartialParams(Sigma sigma_new, Sigma sigma_old) {
  const double n = sigma_new.value;
  const double o = sigma_old.value;
  if (!(n > 0.0) || !(n < o) || !std::isfinite(o)) {
    Fail(ErrorCode::kInvalidArgument,
         "partial reuse needs 0 < sigma_new < sigma_old");
  }
  // (o - n)(o + n) avoids cancellation in o^2 - n^2 when n is close to o.
  const double gap = std::sqrt((o - n) * (o + n));
  PartialParams p;
  p.fraction = (n / o) * (n / o);
  p.sigma_extra = {n * gap / o};
  p.sigma_eff = {o * n / gap};
  return p;
}

ReuseDecision Decide(const Digest& key, Sigma sigma_new,
                     const HistoryIndex& index) {
  const HistoryIndex::KeyHistory* h = index.Find(key);
  if (h == nullptr || h->entries.empty()) return FreshDecision{sigma_new};

  for (const HistoryEntry& e : h->entries) {
    if (SameSigma(e.sigma, sigma_new.value)) {
      return ExactMatchDecision{e.record_index, e.answer, {e.sigma}};
    }
  }
  if (sigma_new.value == 0.0) return FreshDecision{sigma_new};

  const HistoryEntry& min = h->min_entry();
  if (sigma_new.value >= min.sigma) {
    const HistoryEntry* base = &min;
    for (const HistoryEntry& e : h->entries) {
      if (e.sigma <= sigma_new.value && e.sigma > base->sigma) base = &e;
    }
    const double n = sigma_new.value;
    const double b = base->sigma;
    return FullReuseDecision{base->record_index, base->answer, {b},
                             {std::sqrt((n - b) * (n + b))}, sigma_new};
  }

  PartialParams p = ComputePartialParams(sigma_new, {min.sigma});
  return PartialReuseDecision{min.record_index, min.answer,  {min.sigma},
                              p.fraction,       p.sigma_extra, p.sigma_eff,
                              sigma_new};
}

PrivacyCost ChargeOf(const ReuseDecision& decision,
                     const PrivacyParams& requested, Sensitivity sens) {
  switch (KindOf(decision)) {
    case ReuseKind::kFresh:
      return {requested.epsilon, requested.delta};
    case ReuseKind::kExactMatch:
    case ReuseKind::kFullReuse:
      return {0.0, 0.0};
    case ReuseKind::kPartialReuse: {
      const auto& d = std::get<PartialReuseDecision>(decision);
      return {EpsilonForSigma(requested.delta, sens, d.sigma_eff),
              requested.delta};
    }
  }
  return {requested.epsilon, requested.delta};
}

Release Execute(const ReuseDecision& decision, std::optional<double> true_value,
                const PrivacyParams& requested, Sensitivity sens,
                NormalSource& rng) {
  if (NeedsTrueValue(decision) && !true_value) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(ReuseKindName(KindOf(decision))) +
             " release needs the true answer");
  }
  Release r;
  r.decision = decision;
  r.sigma = TargetSigma(decision);
  const PrivacyCost cost = ChargeOf(decision, requested, sens);
  r.charged_epsilon = cost.epsilon;
  r.charged_delta = cost.delta;
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, FreshDecision>) {
          r.answer = GaussianMechanism(*true_value, d.sigma_new, rng);
        } else if constexpr (std::is_same_v<D, ExactMatchDecision>) {
          r.answer = d.base_answer;
        } else if constexpr (std::is_same_v<D, FullReuseDecision>) {
          r.answer = GaussianMechanism(d.base_answer, d.sigma_topup, rng);
        } else {
          const double old_noise = d.base_answer - *true_value;
          r.answer = GaussianMechanism(*true_value + d.fraction * old_noise,
                                       d.sigma_extra, rng);
        }
      },
      decision);
  return r;
}

}  // namespace dpledger
