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

#ifndef DPLEDGER_HTTP_API_H_
#define DPLEDGER_HTTP_API_H_

#include <httplib.h>

#include "dpledger/error.h"
#include "dpledger/service.h"

namespace dpledger {

// 400 validation, 402 insufficient funds, 404 unknown account, 422 empty
// selection, 429 budget exceeded, 500 storage or corruption.
int HttpStatusFor(ErrorCode code);

// Routes:
//   POST /api/queries            QueryRequest -> QueryResponse
//   GET  /api/accounts           all accounts
//   GET  /api/accounts/{id}      {address, balance}
//   GET  /api/budget             remaining budget + cost report
//   GET  /api/history[?key=hex]  release records
//   GET  /api/ledger/verify      {ok, first_bad_index, ...}
//   GET  /api/meta               schema, query kinds, fee schedule
// Errors are returned as {"code": ..., "message": ...}.
void RegisterRoutes(httplib::Server& server, QueryService& service);

}  // namespace dpledger

#endif  // DPLEDGER_HTTP_API_H_
