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

#ifndef DPLEDGER_ACCOUNTANT_H_
#define DPLEDGER_ACCOUNTANT_H_

#include <cstdint>
#include <string>

#include "dpledger/error.h"

namespace dpledger {

struct PrivacyCost {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Per-dataset budget under basic composition, with a second "naive" track
// holding what every query would have cost without reuse.
struct BudgetState {
  double epsilon_budget = 0.0;
  double delta_budget = 0.0;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
  double naive_epsilon_total = 0.0;
  double naive_delta_total = 0.0;
  std::uint64_t query_count = 0;

  double remaining_epsilon() const { return epsilon_budget - epsilon_spent; }
  double remaining_delta() const { return delta_budget - delta_spent; }

  friend bool operator==(const BudgetState&, const BudgetState&) = default;
};

class BudgetExceeded : public Error {
 public:
  enum class Which { kEpsilon, kDelta };

  BudgetExceeded(Which which, double remaining, const std::string& message)
      : Error(ErrorCode::kBudgetExceeded, message),
        which_(which),
        remaining_(remaining) {}

  Which which() const { return which_; }
  double remaining() const { return remaining_; }

 private:
  Which which_;
  double remaining_;
};

// Throws Error(kInvalidArgument) unless epsilon_budget > 0 and
// 0 < delta_budget < 1.
BudgetState NewBudget(double epsilon_budget, double delta_budget);

// Returns the state after charging `actual` to the budget and `naive` to the
// baseline track. Throws Error(kBudgetExceeded) if either spent total would
// pass its budget (BudgetExceeded); the input state is never modified.
BudgetState Charge(const BudgetState& state, PrivacyCost actual,
                   PrivacyCost naive);

struct CostReport {
  double naive_epsilon_total = 0.0;
  double actual_epsilon_total = 0.0;
  // actual / naive; 0 when nothing has been charged.
  double savings_ratio = 0.0;
  std::uint64_t query_count = 0;
};

CostReport Report(const BudgetState& state);
CostReport MakeReport(double naive_epsilon, double actual_epsilon,
                      std::uint64_t query_count);

}  // namespace dpledger

#endif  // DPLEDGER_ACCOUNTANT_H_
