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

#include "dpledger/http_api.h"

#include <string>

namespace dpledger {

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kInsufficientFunds:
      return 402;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kEmptySelection:
      return 422;
    case ErrorCode::kBudgetExceeded:
      return 429;
    case ErrorCode::kDataError:
    case ErrorCode::kStorage:
    case ErrorCode::kCorrupt:
      return 500;
  }
  return 500;
}

namespace {

constexpr char kJson[] = "application/json";

void SendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void SendError(httplib::Response& res, ErrorCode code,
               const std::string& message) {
  Json body;
  body["code"] = ErrorCodeName(code);
  body["message"] = message;
  SendJson(res, HttpStatusFor(code), body);
}

// Runs a handler, turning exceptions into {code, message} bodies.
template <typename Fn>
httplib::Server::Handler Guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const BudgetExceeded& e) {
      Json body;
      body["code"] = ErrorCodeName(e.code());
      body["message"] = e.what();
      body["which"] =
          e.which() == BudgetExceeded::Which::kEpsilon ? "epsilon" : "delta";
      body["remaining"] = e.remaining();
      SendJson(res, HttpStatusFor(e.code()), body);
    } catch (const Error& e) {
      SendError(res, e.code(), e.what());
    } catch (const Json::exception& e) {
      SendError(res, ErrorCode::kInvalidArgument, e.what());
    } catch (const std::exception& e) {
      SendError(res, ErrorCode::kStorage, e.what());
    }
  };
}

Json AccountToJson(const Account& a) {
  return {{"address", a.id}, {"balance", a.balance}};
}

}  // namespace

void RegisterRoutes(httplib::Server& server, QueryService& service) {
  server.Post("/api/queries", Guarded([&service](const httplib::Request& req,
                                                 httplib::Response& res) {
                Json body = Json::parse(req.body, nullptr, false);
                if (body.is_discarded()) {
                  Fail(ErrorCode::kInvalidArgument, "request body is not JSON");
                }
                SendJson(res, 200,
                         ResponseToJson(service.SubmitQuery(RequestFromJson(body))));
              }));

  server.Get("/api/accounts",
             Guarded([&service](const httplib::Request&, httplib::Response& res) {
               Json arr = Json::array();
               for (const Account& a : service.ListAccounts()) {
                 arr.push_back(AccountToJson(a));
               }
               SendJson(res, 200, arr);
             }));

  server.Get(R"(/api/accounts/([0-9A-Za-z_\-]+))",
             Guarded([&service](const httplib::Request& req,
                                httplib::Response& res) {
               SendJson(res, 200,
                        AccountToJson(service.GetAccount(req.matches[1].str())));
             }));

  server.Get("/api/budget",
             Guarded([&service](const httplib::Request&, httplib::Response& res) {
               BudgetView view = service.GetBudget();
               Json j;
               j["epsilon_budget"] = view.state.epsilon_budget;
               j["delta_budget"] = view.state.delta_budget;
               j["remaining_epsilon"] = view.state.remaining_epsilon();
               j["remaining_delta"] = view.state.remaining_delta();
               j["epsilon_spent"] = view.state.epsilon_spent;
               j["delta_spent"] = view.state.delta_spent;
               j["report"] = ReportToJson(view.report);
               SendJson(res, 200, j);
             }));

  server.Get("/api/history", Guarded([&service](const httplib::Request& req,
                                                httplib::Response& res) {
               std::optional<Digest> key;
               if (req.has_param("key")) {
                 key = DigestFromHex(req.get_param_value("key"));
                 if (!key) {
                   Fail(ErrorCode::kInvalidArgument,
                        "key must be 64 lowercase hex characters");
                 }
               }
               Json arr = Json::array();
               for (const ReleaseRecord& r : service.GetHistory(key)) {
                 arr.push_back(RecordToJson(r));
               }
               SendJson(res, 200, arr);
             }));

  server.Get("/api/ledger/verify",
             Guarded([&service](const httplib::Request&, httplib::Response& res) {
               VerifyResult v = service.VerifyLedger();
               Json j;
               j["ok"] = v.ok;
               j["record_count"] = v.record_count;
               j["first_bad_index"] = v.ok ? Json(nullptr) : Json(v.first_bad_index);
               j["reason"] = v.reason;
               SendJson(res, 200, j);
             }));

  server.Get("/api/meta",
             Guarded([&service](const httplib::Request&, httplib::Response& res) {
               ServiceMeta meta = service.Meta();
               Json j;
               j["schema"] = SchemaToJson(meta.schema);
               j["row_count"] = meta.row_count;
               j["query_kinds"] = {"COUNT", "SUM", "MEAN"};
               j["comparators"] = {"<", "<=", "=", ">=", ">"};
               j["fees"] = {{"base_fee", meta.fees.base_fee},
                            {"per_byte_fee", meta.fees.per_byte_fee}};
               j["budget"] = {{"epsilon", meta.epsilon_budget},
                              {"delta", meta.delta_budget}};
               j["max_delta"] = kMaxDelta;
               SendJson(res, 200, j);
             }));
}

}  // namespace dpledger
