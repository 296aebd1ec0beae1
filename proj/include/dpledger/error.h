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

#ifndef DPLEDGER_ERROR_H_
#define DPLEDGER_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpledger {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kBudgetExceeded,
  kInsufficientFunds,
  kEmptySelection,
  kDataError,
  kStorage,
  kCorrupt,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above; the
// HTTP layer maps codes to status classes and the CLI to exit messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace dpledger

#endif  // DPLEDGER_ERROR_H_
