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

#include "dpledger/error.h"

namespace dpledger {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "INVALID_ARGUMENT";
    case ErrorCode::kNotFound:
      return "NOT_FOUND";
    case ErrorCode::kBudgetExceeded:
      return "BUDGET_EXCEEDED";
    case ErrorCode::kInsufficientFunds:
      return "INSUFFICIENT_FUNDS";
    case ErrorCode::kEmptySelection:
      return "EMPTY_SELECTION";
    case ErrorCode::kDataError:
      return "DATA_ERROR";
    case ErrorCode::kStorage:
      return "STORAGE_FAILURE";
    case ErrorCode::kCorrupt:
      return "CORRUPT";
  }
  return "UNKNOWN";
}

}  // namespace dpledger
