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

#ifndef DPLEDGER_DP_CORE_H_
#define DPLEDGER_DP_CORE_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dpledger/query.h"
#include "dpledger/schema.h"

namespace dpledger {

// Largest accepted delta. Keeps ln(1.25 / delta) comfortably positive.
inline constexpr double kMaxDelta = 0.5;

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  // Throws Error(kInvalidArgument) unless epsilon > 0 (finite) and
  // 0 < delta <= kMaxDelta.
  void Validate() const;
};

struct Sensitivity {
  double value = 0.0;
};

struct Sigma {
  double value = 0.0;
};

// L2 sensitivity under add/remove-one-record neighbours:
//   COUNT      -> 1
//   SUM(col)   -> max(|lo|, |hi|)
//   MEAN(col)  -> (hi - lo) / n_public
// MEAN treats the dataset size as public, which makes it an approximation
// for datasets whose size is itself private.
Sensitivity SensitivityOf(const QueryDescriptor& desc, const Schema& schema,
                          std::int64_t n_public);

// sigma = sqrt(2 ln(1.25 / delta)) * sensitivity / epsilon.
Sigma ComputeSigma(const PrivacyParams& params, Sensitivity sens);

// Epsilon that ComputeSigma would need to produce `sigma` at this delta.
double EpsilonForSigma(double delta, Sensitivity sens, Sigma sigma);

class NormalSource {
 public:
  virtual ~NormalSource() = default;
  virtual double StandardNormal() = 0;
};

// Seed-stable generator: mt19937_64 seeded through std::seed_seq (both fully
// specified by the standard) feeding the Marsaglia polar method. The second
// variate of each accepted pair is cached and returned by the next call.
class Rng final : public NormalSource {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream for (seed, stream); used to derive one stream per
  // ledger record so results survive restarts.
  Rng(std::uint64_t seed, std::uint64_t stream);

  static Rng FromEntropy();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double Uniform();
  double StandardNormal() override;
  std::uint64_t NextU64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// true_value + sigma * z with z ~ N(0, 1). Always consumes one variate so
// replay stays aligned even when sigma is zero.
double GaussianMechanism(double true_value, Sigma sigma, NormalSource& rng);

// Pr[N(mean, sigma^2) >= t]; a step function when sigma == 0.
double GaussianUpperTail(double t, double mean, double sigma);
// Pr[N(mean, sigma^2) < t].
double GaussianLowerTail(double t, double mean, double sigma);

// Evenly spaced thresholds covering [-10 sigma, sens + 10 sigma].
std::vector<double> ThresholdGrid(Sigma sigma, Sensitivity sens,
                                  std::size_t points);

// Exact check of the (epsilon, delta) inequality for the mechanism run on two
// true answers 0 and `sens` (neighbouring datasets), over the threshold
// events {Y >= t}, in both directions. For equal-variance shifted Gaussians
// the likelihood ratio is monotone in the output, so by Neyman-Pearson the
// threshold events are the worst-case measurable sets.
bool VerifyDpGuarantee(const PrivacyParams& params, Sensitivity sens,
                       Sigma sigma, std::span<const double> grid);

}  // namespace dpledger

#endif  // DPLEDGER_DP_CORE_H_
