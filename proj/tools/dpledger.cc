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

// dpledger: operator CLI for the differentially private query ledger.
//
//   dpledger serve    --config service.json [--web-root DIR]
//   dpledger ingest   --config service.json
//   dpledger verify   --ledger data/ledger.log
//   dpledger simulate --config service.json --workload w.csv --out out.csv
//   dpledger report   --ledger data/ledger.log

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dpledger/dataset.h"
#include "dpledger/error.h"
#include "dpledger/http_api.h"
#include "dpledger/ledger.h"
#include "dpledger/service.h"
#include "dpledger/simulate.h"

namespace {

using namespace dpledger;

httplib::Server* g_server = nullptr;

void StopServer(int) {
  if (g_server != nullptr) g_server->stop();
}

int Serve(const std::string& config_path, const std::string& web_root) {
  ServiceConfig config = LoadConfig(config_path);
  auto service = QueryService::Open(config);
  httplib::Server server;
  RegisterRoutes(server, *service);
  if (!web_root.empty() && !server.set_mount_point("/", web_root)) {
    std::cerr << "web root '" << web_root << "' is not a directory\n";
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, StopServer);
  std::signal(SIGTERM, StopServer);
  std::cout << "listening on " << config.listen_host << ':' << config.listen_port
            << " (" << service->GetHistory(std::nullopt).size()
            << " records on ledger)" << std::endl;
  if (!server.listen(config.listen_host, config.listen_port)) {
    std::cerr << "cannot listen on " << config.listen_host << ':'
              << config.listen_port << '\n';
    return 1;
  }
  return 0;
}

int Ingest(const std::string& config_path) {
  ServiceConfig config = LoadConfig(config_path);
  Dataset ds = LoadCsv(config.dataset_path, config.schema);
  std::cout << config.dataset_path.string() << ": " << ds.size() << " rows\n";
  for (const ColumnSpec& c : ds.schema().columns()) {
    std::cout << "  " << c.name << " in [" << FormatDouble(c.lo) << ", "
              << FormatDouble(c.hi) << "]\n";
  }
  return 0;
}

int Verify(const std::string& ledger_path) {
  VerifyResult v = VerifyLedgerFile(ledger_path);
  if (v.ok) {
    std::cout << "OK " << v.record_count << " records\n";
    return 0;
  }
  std::cout << "BROKEN at record " << v.first_bad_index << ": " << v.reason
            << '\n';
  return 2;
}

int Simulate(const std::string& config_path, const std::string& workload_path,
             const std::string& out_path, const std::string& data_dir,
             std::optional<std::uint64_t> seed) {
  ServiceConfig config = LoadConfig(config_path);
  if (!data_dir.empty()) config.data_dir = data_dir;
  if (seed) config.seed = seed;
  if (!config.seed) config.seed = 0;
  std::vector<WorkloadItem> workload = LoadWorkload(workload_path);
  std::vector<SimulationRow> rows = RunSimulation(config, workload);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write '" << out_path << "'\n";
    return 1;
  }
  WriteSimulationCsv(out, rows);
  if (!rows.empty()) {
    std::cout << rows.size() << " queries, cumulative epsilon "
              << FormatDouble(rows.back().cum_actual_epsilon) << " (naive "
              << FormatDouble(rows.back().cum_naive_epsilon) << ")\n";
  }
  return 0;
}

int Report(const std::string& ledger_path) {
  CostReport r = ReportFromRecords(ReadLedgerRecords(ledger_path));
  std::cout << "query_count," << r.query_count << '\n'
            << "naive_epsilon_total," << FormatDouble(r.naive_epsilon_total)
            << '\n'
            << "actual_epsilon_total," << FormatDouble(r.actual_epsilon_total)
            << '\n'
            << "savings_ratio," << FormatDouble(r.savings_ratio) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private query service with a hash-chained release ledger"};
  app.require_subcommand(1);

  std::string config_path, ledger_path, workload_path, out_path, data_dir,
      web_root;
  std::optional<std::uint64_t> seed;

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config_path, "Service config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--web-root", web_root, "Directory of static UI files");

  auto* ingest = app.add_subcommand("ingest", "Load and check the dataset");
  ingest->add_option("--config", config_path, "Service config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Verify a ledger file");
  verify->add_option("--ledger", ledger_path, "Ledger file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* simulate =
      app.add_subcommand("simulate", "Run a workload through the pipeline");
  simulate->add_option("--config", config_path, "Service config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--workload", workload_path, "Workload CSV")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path, "Per-query output CSV")->required();
  simulate->add_option("--data-dir", data_dir,
                       "Directory for the new ledger (default: config data_dir)");
  simulate->add_option("--seed", seed, "RNG seed (default: config seed or 0)");

  auto* report = app.add_subcommand("report", "Cost report from a ledger file");
  report->add_option("--ledger", ledger_path, "Ledger file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return Serve(config_path, web_root);
    if (*ingest) return Ingest(config_path);
    if (*verify) return Verify(ledger_path);
    if (*simulate) {
      return Simulate(config_path, workload_path, out_path, data_dir, seed);
    }
    if (*report) return Report(ledger_path);
  } catch (const Error& e) {
    std::cerr << "error [" << ErrorCodeName(e.code()) << "]: " << e.what()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
