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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "dpledger/dp_core.h"
#include "dpledger/ledger.h"
#include "dpledger/reuse_engine.h"
#include "dpledger/service.h"
#include "dpledger/simulate.h"
#include "service_fixture.h"
#include "test_util.h"

namespace dpledger {
namespace {

using ::dpledger::testing::Ask;
using ::dpledger::testing::CountAgeOver;
using ::dpledger::testing::KsPValue;
using ::dpledger::testing::KsStatistic;
using ::dpledger::testing::PeopleConfig;
using ::dpledger::testing::PeopleCsv;
using ::dpledger::testing::ReadText;
using ::dpledger::testing::TempDir;
using ::dpledger::testing::WriteText;

// sqrt(2 ln(1.25e5)), evaluated at 40 digits with mpmath.
constexpr double kSigmaOracle = 4.844805262605389421;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

Outcome A1() {
  TempDir dir;
  WriteText(dir / "people.csv", PeopleCsv());
  WriteText(dir / "svc.json", R"({
    "dataset": "people.csv",
    "schema": [{"name": "age", "lo": 0, "hi": 120},
               {"name": "income", "lo": 0, "hi": 1000}],
    "budget": {"epsilon": 10, "delta": 0.001},
    "accounts": [{"id": "analyst", "balance": 100}]
  })");
  WriteText(dir / "workload.csv",
            "kind,column,comparator,constant,epsilon,delta,repeats\n"
            "COUNT,age,>,30,1,1e-5,100\n");
  const std::string cmd = std::string("'") + DPLEDGER_CLI_PATH +
                          "' simulate --config '" + (dir / "svc.json").string() +
                          "' --workload '" + (dir / "workload.csv").string() +
                          "' --out '" + (dir / "out.csv").string() + "' >/dev/null";
  auto start = Clock::now();
  int status = std::system(cmd.c_str());
  double secs = SecondsSince(start);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    return {false, "simulate exited with status " + std::to_string(status)};
  }
  std::istringstream csv(ReadText(dir / "out.csv"));
  std::string line, last;
  int rows = -1;
  while (std::getline(csv, line)) {
    last = line;
    ++rows;
  }
  // index,reuse_kind,charged_epsilon,cum_actual_epsilon,cum_naive_epsilon
  std::vector<std::string> cells;
  std::stringstream ss(last);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  if (rows != 100 || cells.size() != 5) {
    return {false, "expected 100 rows, got " + std::to_string(rows)};
  }
  double actual = std::stod(cells[3]);
  double naive = std::stod(cells[4]);
  bool ok = actual == 1.0 && naive == 100.0 && actual / naive == 0.01 && secs < 5.0;
  return {ok, "actual=" + cells[3] + " naive=" + cells[4] +
                  " ratio=" + Fmt(actual / naive) + " time=" + Fmt(secs) + "s"};
}

Outcome A2() {
  double s = ComputeSigma({1.0, 1e-5}, {1.0}).value;
  double rel = std::abs(s - kSigmaOracle) / kSigmaOracle;
  bool scaling = true;
  for (double eps : {0.1, 0.25, 0.5, 1.0, 1.7, 3.0}) {
    for (double delta : {1e-9, 1e-5, 0.01}) {
      scaling = scaling && ComputeSigma({2 * eps, delta}, {1.0}).value ==
                               ComputeSigma({eps, delta}, {1.0}).value / 2;
    }
  }
  return {rel <= 1e-12 && scaling,
          "sigma=" + Fmt(s) + " rel_err=" + Fmt(rel) +
              " scaling_exact=" + (scaling ? "yes" : "no")};
}

// Minimises (1 - f) / sqrt(n^2 - f^2 o^2) over (0, n / o): dense grid, then
// ternary refinement.
long double GridSearchCost(long double n, long double o, long double f) {
  return (1 - f) / std::sqrt(n * n - f * f * o * o);
}

long double GridSearchFraction(long double n, long double o) {
  const long double hi = n / o;
  constexpr int kGrid = 100000;
  int best = 1;
  for (int i = 1; i < kGrid; ++i) {
    if (GridSearchCost(n, o, hi * i / kGrid) < GridSearchCost(n, o, hi * best / kGrid)) {
      best = i;
    }
  }
  long double a = hi * (best - 1) / kGrid, b = hi * (best + 1) / kGrid;
  for (int it = 0; it < 300; ++it) {
    long double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (GridSearchCost(n, o, m1) < GridSearchCost(n, o, m2)) b = m2; else a = m1;
  }
  return (a + b) / 2;
}

Outcome A3() {
  PartialParams p = ComputePartialParams({3.0}, {5.0});
  auto rel = [](double got, double want) { return std::abs(got - want) / want; };
  // The objective is flat at its minimum, so the oracle's fraction is only
  // good to about sqrt(long double epsilon); its minimum value, and hence
  // sigma_eff = 1 / min cost, is good to full precision.
  const long double oracle_f = GridSearchFraction(3.0L, 5.0L);
  const double oracle_eff =
      static_cast<double>(1 / GridSearchCost(3.0L, 5.0L, oracle_f));
  const double oracle_extra =
      static_cast<double>(std::sqrt(9.0L - oracle_f * oracle_f * 25.0L));
  bool exact = rel(p.fraction, 0.36) <= 1e-9 && rel(p.sigma_extra.value, 2.4) <= 1e-9 &&
               rel(p.sigma_eff.value, 3.75) <= 1e-9;
  bool oracle = rel(p.fraction, static_cast<double>(oracle_f)) <= 1e-9 &&
                rel(p.sigma_extra.value, oracle_extra) <= 1e-9 &&
                rel(p.sigma_eff.value, oracle_eff) <= 1e-9;

  std::mt19937_64 gen(20260101);
  std::uniform_real_distribution<double> u(0.05, 40.0);
  int cheaper = 0, pairs = 0;
  const Digest key = CanonicalKey(CountAgeOver(30));
  while (pairs < 100) {
    double a = u(gen), b = u(gen);
    if (a == b) continue;
    ++pairs;
    double n = std::min(a, b), o = std::max(a, b);
    HistoryIndex index;
    index.Add(key, {0, o, 0.0});
    ReuseDecision d = Decide(key, {n}, index);
    double eps = kSigmaOracle / n;
    PrivacyCost c = ChargeOf(d, {eps, 1e-5}, {1.0});
    if (KindOf(d) == ReuseKind::kPartialReuse && c.epsilon < eps) ++cheaper;
  }
  return {exact && oracle && cheaper == 100,
          "f=" + Fmt(p.fraction) + " sigma_extra=" + Fmt(p.sigma_extra.value) +
              " sigma_eff=" + Fmt(p.sigma_eff.value) + " oracle_f=" + Fmt(static_cast<double>(oracle_f)) +
              " oracle_sigma_eff=" + Fmt(oracle_eff) +
              " cheaper=" + std::to_string(cheaper) + "/100"};
}

Outcome A4() {
  constexpr int kN = 10000;
  auto start = Clock::now();
  Rng base_rng(401), reuse_rng(402), fresh_rng(403);
  std::vector<double> full, fresh5, partial, fresh3;
  const double true_value = 161.0;
  for (int i = 0; i < kN; ++i) {
    double base = GaussianMechanism(true_value, {3.0}, base_rng);
    FullReuseDecision d{0, base, {3.0}, {4.0}, {5.0}};
    full.push_back(Execute(d, std::nullopt, {1.0, 1e-5}, {1.0}, reuse_rng).answer);
    fresh5.push_back(GaussianMechanism(true_value, {5.0}, fresh_rng));
  }
  PartialParams p = ComputePartialParams({3.0}, {5.0});
  for (int i = 0; i < kN; ++i) {
    double base = GaussianMechanism(true_value, {5.0}, base_rng);
    PartialReuseDecision d{0, base, {5.0}, p.fraction, p.sigma_extra, p.sigma_eff, {3.0}};
    partial.push_back(Execute(d, true_value, {1.0, 1e-5}, {1.0}, reuse_rng).answer);
    fresh3.push_back(GaussianMechanism(true_value, {3.0}, fresh_rng));
  }
  double d_full = KsStatistic(full, fresh5);
  double d_partial = KsStatistic(partial, fresh3);
  double p_full = KsPValue(d_full, kN, kN);
  double p_partial = KsPValue(d_partial, kN, kN);
  double secs = SecondsSince(start);
  return {p_full > 0.01 && p_partial > 0.01 && secs < 30.0,
          "full D=" + Fmt(d_full) + " p=" + Fmt(p_full) + "; partial D=" +
              Fmt(d_partial) + " p=" + Fmt(p_partial) + " time=" + Fmt(secs) + "s"};
}

Outcome A5() {
  int passed = 0;
  int under_failed = 0;
  for (double eps : {0.1, 0.5, 1.0}) {
    for (double delta : {1e-5, 1e-3}) {
      Sigma s = ComputeSigma({eps, delta}, {1.0});
      if (VerifyDpGuarantee({eps, delta}, {1.0}, s, ThresholdGrid(s, {1.0}, 10000))) {
        ++passed;
      }
      Sigma under{s.value * 0.1};
      if (!VerifyDpGuarantee({eps, delta}, {1.0}, under,
                             ThresholdGrid(under, {1.0}, 10000))) {
        ++under_failed;
      }
    }
  }
  return {passed == 6 && under_failed == 6,
          "calibrated passes " + std::to_string(passed) + "/6, under-scaled fails " +
              std::to_string(under_failed) + "/6"};
}

Outcome A6() {
  TempDir dir;
  ServiceConfig config = PeopleConfig(dir.path(), 1000.0);
  config.accounts = {{std::string("alice"), 1000.0}};
  {
    auto svc = QueryService::Open(config);
    for (int i = 0; i < 60; ++i) {
      svc->SubmitQuery(Ask(CountAgeOver(20 + i % 12), 0.5 + 0.25 * (i % 5)));
    }
  }
  const std::string bytes = ReadText(QueryService::LedgerPath(config.data_dir));
  std::vector<std::size_t> starts = {0};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == '\n' && i + 1 < bytes.size()) starts.push_back(i + 1);
  }
  std::mt19937_64 gen(606);
  int detected = 0;
  std::string first_miss;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t rec = gen() % starts.size();
    std::size_t end = rec + 1 < starts.size() ? starts[rec + 1] : bytes.size();
    std::size_t pos = starts[rec] + gen() % (end - starts[rec]);
    std::string mutated = bytes;
    mutated[pos] = static_cast<char>(
        static_cast<unsigned char>(mutated[pos]) ^ (1 + gen() % 255));
    VerifyResult v = VerifyLedgerBytes(mutated);
    if (!v.ok && v.first_bad_index == rec) {
      ++detected;
    } else if (first_miss.empty()) {
      first_miss = " first miss: record " + std::to_string(rec) + " byte " +
                   std::to_string(pos);
    }
  }
  return {detected == 100, std::to_string(detected) + "/100 mutations reported at "
                               "the mutated record" + first_miss};
}

// Runs 6 queries in a child, SIGKILLs it at `stage` of query `victim`, then
// reopens and checks the recovered service.
bool CrashOnce(CommitStage stage, int victim, std::string* why) {
  TempDir dir;
  ServiceConfig config = PeopleConfig(dir.path());
  std::cout.flush();
  pid_t pid = ::fork();
  if (pid < 0) {
    *why = "fork failed";
    return false;
  }
  if (pid == 0) {
    try {
      auto svc = QueryService::Open(config);
      int query = 0;
      svc->set_fault_hook([&](CommitStage s) {
        if (s == stage && query == victim) ::kill(::getpid(), SIGKILL);
      });
      for (; query < 6; ++query) {
        svc->SubmitQuery(Ask(CountAgeOver(25 + query % 3), 0.5 + 0.25 * query));
      }
    } catch (...) {
    }
    ::_exit(3);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (!WIFSIGNALED(status)) {
    *why = "child was not killed";
    return false;
  }
  try {
    auto svc = QueryService::Open(config);
    if (!svc->VerifyLedger().ok) {
      *why = "ledger does not verify";
      return false;
    }
    auto records = svc->GetHistory(std::nullopt);
    PersistedState s = svc->SnapshotState();
    PersistedState rebuilt = ReplayLedger(
        {0, s.initial_accounts, s.initial_accounts, s.initial_budget, s.initial_budget},
        records);
    CostReport from_ledger = ReportFromRecords(records);
    CostReport persisted = svc->GetBudget().report;
    std::size_t n = records.size();
    bool whole = n == static_cast<std::size_t>(victim) ||
                 n == static_cast<std::size_t>(victim) + 1;
    if (!(rebuilt == s) || !whole ||
        from_ledger.actual_epsilon_total != persisted.actual_epsilon_total ||
        from_ledger.naive_epsilon_total != persisted.naive_epsilon_total) {
      *why = "recovered state disagrees with ledger (" + std::to_string(n) + " records)";
      return false;
    }
  } catch (const std::exception& e) {
    *why = std::string("reopen failed: ") + e.what();
    return false;
  }
  return true;
}

Outcome A7() {
  std::mt19937_64 gen(707);
  int recovered = 0;
  std::string failures;
  for (int trial = 0; trial < 10; ++trial) {
    auto stage = static_cast<CommitStage>(gen() % 6);
    int victim = static_cast<int>(gen() % 6);
    std::string why;
    if (CrashOnce(stage, victim, &why)) {
      ++recovered;
    } else {
      failures += " [stage " + std::to_string(static_cast<int>(stage)) + " query " +
                  std::to_string(victim) + ": " + why + "]";
    }
  }
  return {recovered == 10, std::to_string(recovered) + "/10 crashes recovered" + failures};
}

Outcome A8() {
  TempDir dir;
  auto svc = QueryService::Open(PeopleConfig(dir.path()));
  QueryResponse first = svc->SubmitQuery(Ask(CountAgeOver(30), 1.0));
  double remaining = svc->GetBudget().state.remaining_epsilon();
  QueryResponse again = svc->SubmitQuery(Ask(CountAgeOver(30), 1.0));
  double remaining_after = svc->GetBudget().state.remaining_epsilon();
  bool identical = std::memcmp(&first.noisy_response, &again.noisy_response,
                               sizeof(double)) == 0;
  bool ok = identical && again.privacy_cost_epsilon == 0.0 &&
            remaining_after == remaining && again.reuse_kind == ReuseKind::kExactMatch;
  return {ok, "answers " + Fmt(first.noisy_response) + " / " + Fmt(again.noisy_response) +
                  " charged=" + Fmt(again.privacy_cost_epsilon) +
                  " remaining " + Fmt(remaining) + " -> " + Fmt(remaining_after)};
}

}  // namespace
}  // namespace dpledger

int main() {
  using Criterion = std::pair<const char*, std::function<dpledger::Outcome()>>;
  const std::vector<Criterion> criteria = {
      {"A1", dpledger::A1}, {"A2", dpledger::A2}, {"A3", dpledger::A3},
      {"A4", dpledger::A4}, {"A5", dpledger::A5}, {"A6", dpledger::A6},
      {"A7", dpledger::A7}, {"A8", dpledger::A8}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    dpledger::Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
