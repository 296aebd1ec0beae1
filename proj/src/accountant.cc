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

#include "dpledger/accountant.h"

#include <cmath>
#include <string>

#include "dpledger/error.h"

namespace dpledger {

BudgetState NewBudget(double epsilon_budget, double delta_budget) {
  if (!std::isfinite(epsilon_budget) || epsilon_budget <= 0.0) {
    Fail(ErrorCode::kInvalidArgument, "epsilon budget must be positive");
  }
  if (!(delta_budget > 0.0 && delta_budget < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "delta budget must lie in (0, 1)");
  }
  BudgetState s;
  s.epsilon_budget = epsilon_budget;
  s.delta_budget = delta_budget;
  return s;
}

BudgetState Charge(const BudgetState& state, PrivacyCost actual,
                   PrivacyCost naive) {
  if (!(actual.epsilon >= 0.0) || !(actual.delta >= 0.0) ||
      !(naive.epsilon >= 0.0) || !(naive.delta >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "privacy costs must be non-negative");
  }
  if (actual.epsilon > naive.epsilon) {
    Fail(ErrorCode::kInvalidArgument,
         "actual epsilon cannot exceed the naive epsilon");
  }
  BudgetState next = state;
  next.epsilon_spent += actual.epsilon;
  next.delta_spent += actual.delta;
  if (next.epsilon_spent > state.epsilon_budget) {
    throw BudgetExceeded(
        BudgetExceeded::Which::kEpsilon, state.remaining_epsilon(),
        "epsilon budget exceeded: requested " + std::to_string(actual.epsilon) +
             ", remaining " + std::to_string(state.remaining_epsilon()));
  }
  if (next.delta_spent > state.delta_budget) {
    throw BudgetExceeded(
        BudgetExceeded::Which::kDelta, state.remaining_delta(),
        "delta budget exceeded: requested " + std::to_string(actual.delta) +
             ", remaining " + std::to_string(state.remaining_delta()));
  }
  next.naive_epsilon_total += naive.epsilon;
  next.naive_delta_total += naive.delta;
  next.query_count += 1;
  return next;
}

CostReport MakeReport(double naive_epsilon, double actual_epsilon,
                      std::uint64_t query_count) {
  CostReport r;
  r.naive_epsilon_total = naive_epsilon;
  r.actual_epsilon_total = actual_epsilon;
  r.savings_ratio = naive_epsilon > 0.0 ? actual_epsilon / naive_epsilon : 0.0;
  r.query_count = query_count;
  return r;
}

CostReport Report(const BudgetState& state) {
  return MakeReport(state.naive_epsilon_total, state.epsilon_spent,
                    state.query_count);
}

}  // namespace dpledger
