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
#include <functional>
#include <vector>

#include "dpledger/error.h"
#include "gtest/gtest.h"

namespace dpledger {
namespace {

// sqrt(2 ln(1.25e5)) and sqrt(2 ln 25) * 2, evaluated at 40 digits with
// mpmath before the build.
constexpr double kSigmaEps1Delta1e5 = 4.844805262605389421;
constexpr double kSigmaEps1Delta005Sens2 = 5.074544964718078640;

Schema TestSchema() {
  return Schema({{"age", 0, 120}, {"income", 0, 100}, {"delta", -50, 30}});
}

QueryDescriptor Count() { return {QueryKind::kCount, std::nullopt, std::nullopt}; }
QueryDescriptor Sum(const std::string& col) {
  return {QueryKind::kSum, col, std::nullopt};
}

// Brute-force sensitivity: every dataset of <= max_rows rows over `domain`
// and every add-one-record neighbour.
double BruteForceSensitivity(const std::vector<double>& domain, int max_rows,
                             const std::function<double(const std::vector<double>&)>& f) {
  double worst = 0.0;
  std::function<void(std::vector<double>&)> walk = [&](std::vector<double>& ds) {
    for (double extra : domain) {
      std::vector<double> neighbour = ds;
      neighbour.push_back(extra);
      worst = std::max(worst, std::abs(f(neighbour) - f(ds)));
    }
    if (static_cast<int>(ds.size()) + 1 >= max_rows) return;
    for (double v : domain) {
      ds.push_back(v);
      walk(ds);
      ds.pop_back();
    }
  };
  std::vector<double> empty;
  walk(empty);
  return worst;
}

double CountOf(const std::vector<double>& ds) { return static_cast<double>(ds.size()); }
double SumOf(const std::vector<double>& ds) {
  double s = 0;
  for (double v : ds) s += v;
  return s;
}

TEST(SensitivityTest, CountIsOneMatchingBruteForce) {
  ASSERT_EQ(BruteForceSensitivity({0, 1}, 3, CountOf), 1.0);
  EXPECT_EQ(SensitivityOf(Count(), TestSchema(), 10).value, 1.0);
}

TEST(SensitivityTest, SumUsesLargestAbsoluteBound) {
  ASSERT_EQ(BruteForceSensitivity({0, 100}, 3, SumOf), 100.0);
  ASSERT_EQ(BruteForceSensitivity({-50, 30}, 3, SumOf), 50.0);
  EXPECT_EQ(SensitivityOf(Sum("income"), TestSchema(), 10).value, 100.0);
  EXPECT_EQ(SensitivityOf(Sum("delta"), TestSchema(), 10).value, 50.0);
}

TEST(SensitivityTest, MeanUsesPublicSize) {
  QueryDescriptor mean{QueryKind::kMean, "income", std::nullopt};
  EXPECT_DOUBLE_EQ(SensitivityOf(mean, TestSchema(), 1000).value, 0.1);
}

TEST(SensitivityTest, CountIgnoresSchemaBounds) {
  Schema wide({{"x", -1e9, 1e9}});
  Schema narrow({{"x", 0, 0}});
  EXPECT_EQ(SensitivityOf(Count(), wide, 5).value,
            SensitivityOf(Count(), narrow, 5).value);
}

TEST(SensitivityTest, Errors) {
  try {
    SensitivityOf(Sum("missing"), TestSchema(), 10);
    FAIL() << "expected unknown column error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_THROW(SensitivityOf(Count(), TestSchema(), 0), Error);
  EXPECT_THROW(SensitivityOf({QueryKind::kSum, std::nullopt, std::nullopt},
                             TestSchema(), 1),
               Error);
}

TEST(ComputeSigmaTest, MatchesHighPrecisionOracle) {
  double s = ComputeSigma({1.0, 1e-5}, {1.0}).value;
  EXPECT_NEAR(s, kSigmaEps1Delta1e5, 1e-12 * kSigmaEps1Delta1e5);
  double s2 = ComputeSigma({1.0, 0.05}, {2.0}).value;
  EXPECT_NEAR(s2, kSigmaEps1Delta005Sens2, 1e-12 * kSigmaEps1Delta005Sens2);
}

TEST(ComputeSigmaTest, ScalesInverselyWithEpsilon) {
  double base = ComputeSigma({1.0, 1e-5}, {1.0}).value;
  EXPECT_EQ(ComputeSigma({2.0, 1e-5}, {1.0}).value, base / 2);
  for (double k : {0.5, 3.0, 7.25, 10.0}) {
    EXPECT_NEAR(ComputeSigma({k, 1e-5}, {1.0}).value, base / k,
                4 * std::numeric_limits<double>::epsilon() * base / k);
  }
}

TEST(ComputeSigmaTest, Monotone) {
  double prev = ComputeSigma({1.0, 1e-9}, {1.0}).value;
  for (double delta : {1e-7, 1e-5, 1e-3, 0.1, 0.5}) {
    double s = ComputeSigma({1.0, delta}, {1.0}).value;
    EXPECT_LT(s, prev) << "delta=" << delta;
    prev = s;
  }
  EXPECT_GT(ComputeSigma({1.0, 1e-5}, {2.0}).value,
            ComputeSigma({1.0, 1e-5}, {1.0}).value);
  EXPECT_LT(ComputeSigma({1.5, 1e-5}, {1.0}).value,
            ComputeSigma({1.0, 1e-5}, {1.0}).value);
}

TEST(PrivacyParamsTest, Validation) {
  EXPECT_NO_THROW((PrivacyParams{1.0, 0.5}.Validate()));
  EXPECT_THROW((PrivacyParams{0.0, 1e-5}.Validate()), Error);
  EXPECT_THROW((PrivacyParams{-1.0, 1e-5}.Validate()), Error);
  EXPECT_THROW((PrivacyParams{1.0, 0.0}.Validate()), Error);
  EXPECT_THROW((PrivacyParams{1.0, 0.6}.Validate()), Error);
  EXPECT_THROW((PrivacyParams{1.0, 2.0}.Validate()), Error);
  EXPECT_THROW((PrivacyParams{std::nan(""), 1e-5}.Validate()), Error);
}

TEST(GaussianMechanismTest, ZeroSigmaIsIdentity) {
  Rng rng(7);
  EXPECT_EQ(GaussianMechanism(42.0, {0.0}, rng), 42.0);
}

TEST(GaussianMechanismTest, DeterministicUnderSeed) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(GaussianMechanism(5.0, {2.0}, a), GaussianMechanism(5.0, {2.0}, b));
  }
  Rng c(1, 9), d(1, 9), e(1, 10);
  EXPECT_EQ(c.StandardNormal(), d.StandardNormal());
  EXPECT_NE(Rng(1, 9).StandardNormal(), e.StandardNormal());
}

TEST(GaussianMechanismTest, UniformStaysInOpenInterval) {
  Rng rng(99);
  for (int i = 0; i < 100000; ++i) {
    double u = rng.Uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(GaussianMechanismTest, SampleMeanAndVariance) {
  constexpr int kSamples = 100000;
  const double sigma = 4.84480;
  Rng rng(2024);
  double sum = 0, sum_sq = 0;
  std::vector<double> draws(kSamples);
  for (double& x : draws) {
    x = GaussianMechanism(10.0, {sigma}, rng);
    sum += x;
  }
  double mean = sum / kSamples;
  for (double x : draws) sum_sq += (x - mean) * (x - mean);
  double var = sum_sq / (kSamples - 1);
  EXPECT_LT(std::abs(mean - 10.0), 4 * sigma / std::sqrt(kSamples));
  EXPECT_LT(std::abs(var - sigma * sigma), 0.05 * sigma * sigma);
}

TEST(VerifyDpTest, CalibratedSigmaPasses) {
  for (double eps : {0.1, 0.5, 1.0}) {
    for (double delta : {1e-5, 1e-3}) {
      Sigma s = ComputeSigma({eps, delta}, {1.0});
      auto grid = ThresholdGrid(s, {1.0}, 10000);
      EXPECT_TRUE(VerifyDpGuarantee({eps, delta}, {1.0}, s, grid))
          << "eps=" << eps << " delta=" << delta;
    }
  }
}

TEST(VerifyDpTest, UnderNoisedFails) {
  Sigma s = ComputeSigma({1.0, 1e-5}, {1.0});
  Sigma under{s.value / 10};
  auto grid = ThresholdGrid(under, {1.0}, 10000);
  EXPECT_FALSE(VerifyDpGuarantee({1.0, 1e-5}, {1.0}, under, grid));
}

TEST(VerifyDpTest, ZeroSensitivityAlwaysPasses) {
  for (double s : {0.0, 0.5, 3.0}) {
    auto grid = ThresholdGrid({s}, {0.0}, 100);
    EXPECT_TRUE(VerifyDpGuarantee({1.0, 1e-5}, {0.0}, {s}, grid));
  }
}

TEST(VerifyDpTest, GridSpansTenSigma) {
  auto grid = ThresholdGrid({2.0}, {1.0}, 10000);
  ASSERT_EQ(grid.size(), 10000u);
  EXPECT_EQ(grid.front(), -20.0);
  EXPECT_EQ(grid.back(), 21.0);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
}

TEST(TailTest, UpperAndLowerAreComplementary) {
  for (double t : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    EXPECT_NEAR(GaussianUpperTail(t, 0.3, 1.7) + GaussianLowerTail(t, 0.3, 1.7),
                1.0, 1e-15);
  }
  EXPECT_NEAR(GaussianUpperTail(0.0, 0.0, 1.0), 0.5, 1e-16);
}

}  // namespace
}  // namespace dpledger
