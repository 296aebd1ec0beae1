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

#ifndef DPLEDGER_JSON_CODEC_H_
#define DPLEDGER_JSON_CODEC_H_

#include <nlohmann/json.hpp>

#include "dpledger/accountant.h"
#include "dpledger/query.h"
#include "dpledger/schema.h"

namespace dpledger {

using Json = nlohmann::ordered_json;

// {"kind":"SUM","column":"income","predicate":{"column":"age","op":">",
//  "constant":30.0}}; absent parts are null.
Json DescriptorToJson(const QueryDescriptor& desc);
// Missing "column" / "predicate" keys are treated as null. Throws
// Error(kInvalidArgument) on malformed input.
QueryDescriptor DescriptorFromJson(const Json& j);

Json SchemaToJson(const Schema& schema);
Schema SchemaFromJson(const Json& j);

Json ReportToJson(const CostReport& report);

// Typed accessors that throw Error(kInvalidArgument) naming the field.
double RequireNumber(const Json& j, const char* field);
const std::string& RequireString(const Json& j, const char* field);

}  // namespace dpledger

#endif  // DPLEDGER_JSON_CODEC_H_
