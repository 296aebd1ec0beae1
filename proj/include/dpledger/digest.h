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

#ifndef DPLEDGER_DIGEST_H_
#define DPLEDGER_DIGEST_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpledger {

using Digest = std::array<std::uint8_t, 32>;

Digest Sha256(std::span<const std::uint8_t> bytes);

// Lowercase hex, two characters per byte.
std::string ToHex(std::span<const std::uint8_t> bytes);

// Strict: only lowercase hex of exactly 2 * out.size() characters is accepted.
bool FromHex(std::string_view hex, std::span<std::uint8_t> out);
std::optional<Digest> DigestFromHex(std::string_view hex);

inline constexpr Digest kZeroDigest{};

// Field-order-fixed binary encoding used for hashing. Integers and doubles are
// big-endian; strings carry a 4-byte length prefix.
class CanonicalWriter {
 public:
  CanonicalWriter& U8(std::uint8_t v);
  CanonicalWriter& U64(std::uint64_t v);
  CanonicalWriter& I64(std::int64_t v);
  CanonicalWriter& F64(double v);
  CanonicalWriter& Str(std::string_view s);
  CanonicalWriter& Bytes(std::span<const std::uint8_t> b);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  Digest Hash() const { return Sha256(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

}  // namespace dpledger

#endif  // DPLEDGER_DIGEST_H_
