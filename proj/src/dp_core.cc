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

#include "dpledger/dp_core.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dpledger/error.h"

namespace dpledger {

void PrivacyParams::Validate() const {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    Fail(ErrorCode::kInvalidArgument, "epsilon must be a positive number");
  }
  if (!std::isfinite(delta) || delta <= 0.0 || delta > kMaxDelta) {
    Fail(ErrorCode::kInvalidArgument, "delta must lie in (0, 0.5]");
  }
}

Sensitivity SensitivityOf(const QueryDescriptor& desc, const Schema& schema,
                          std::int64_t n_public) {
  if (n_public < 1) {
    Fail(ErrorCode::kInvalidArgument, "public dataset size must be >= 1");
  }
  if (desc.kind == QueryKind::kCount) return {1.0};
  if (!desc.column) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(QueryKindName(desc.kind)) + " requires a column");
  }
  const ColumnSpec* col = schema.Find(*desc.column);
  if (col == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "unknown column '" + *desc.column + "'");
  }
  switch (desc.kind) {
    case QueryKind::kSum:
      return {std::max(std::abs(col->lo), std::abs(col->hi))};
    case QueryKind::kMean:
      return {(col->hi - col->lo) / static_cast<double>(n_public)};
    case QueryKind::kCount:
      break;
  }
  Fail(ErrorCode::kInvalidArgument, "unsupported query kind");
}

Sigma ComputeSigma(const PrivacyParams& params, Sensitivity sens) {
  params.Validate();
  if (!std::isfinite(sens.value) || sens.value < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "sensitivity must be finite and >= 0");
  }
  return {std::sqrt(2.0 * std::log(1.25 / params.delta)) * sens.value /
          params.epsilon};
}

double EpsilonForSigma(double delta, Sensitivity sens, Sigma sigma) {
  return std::sqrt(2.0 * std::log(1.25 / delta)) * sens.value / sigma.value;
}

namespace {

std::mt19937_64 SeededEngine(std::initializer_list<std::uint32_t> words) {
  std::seed_seq seq(words);
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed)
    : engine_(SeededEngine({static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)})) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(SeededEngine({static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32),
                            static_cast<std::uint32_t>(stream),
                            static_cast<std::uint32_t>(stream >> 32),
                            0x9e3779b9u})) {}

Rng Rng::FromEntropy() {
  std::random_device rd;
  std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  return Rng(seed);
}

double Rng::Uniform() {
  // (k + 0.5) / 2^53 for k in [0, 2^53): never 0, never 1.
  std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double Rng::StandardNormal() {
  if (spare_) {
    double z = *spare_;
    spare_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  return u * scale;
}

double GaussianMechanism(double true_value, Sigma sigma, NormalSource& rng) {
  double z = rng.StandardNormal();
  if (sigma.value == 0.0) return true_value;
  return true_value + sigma.value * z;
}

double GaussianUpperTail(double t, double mean, double sigma) {
  if (sigma == 0.0) return t <= mean ? 1.0 : 0.0;
  return 0.5 * std::erfc((t - mean) / (sigma * std::sqrt(2.0)));
}

double GaussianLowerTail(double t, double mean, double sigma) {
  if (sigma == 0.0) return t > mean ? 1.0 : 0.0;
  return 0.5 * std::erfc((mean - t) / (sigma * std::sqrt(2.0)));
}

std::vector<double> ThresholdGrid(Sigma sigma, Sensitivity sens,
                                  std::size_t points) {
  std::vector<double> grid;
  if (points == 0) return grid;
  double lo = -10.0 * sigma.value;
  double hi = sens.value + 10.0 * sigma.value;
  grid.reserve(points);
  if (points == 1) {
    grid.push_back(lo);
    return grid;
  }
  double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid.push_back(i + 1 == points ? hi : lo + step * static_cast<double>(i));
  }
  return grid;
}

bool VerifyDpGuarantee(const PrivacyParams& params, Sensitivity sens,
                       Sigma sigma, std::span<const double> grid) {
  if (sens.value == 0.0) return true;
  const double bound = std::exp(params.epsilon);
  for (double t : grid) {
    // {Y >= t} and its complement {Y < t} cover both tails.
    double p = GaussianUpperTail(t, 0.0, sigma.value);
    double q = GaussianUpperTail(t, sens.value, sigma.value);
    if (p > bound * q + params.delta) return false;
    if (q > bound * p + params.delta) return false;
    double pc = GaussianLowerTail(t, 0.0, sigma.value);
    double qc = GaussianLowerTail(t, sens.value, sigma.value);
    if (pc > bound * qc + params.delta) return false;
    if (qc > bound * pc + params.delta) return false;
  }
  return true;
}

}  // namespace dpledger
