/*
 * Copyright 2026 The DBAFL Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: run, sweep and audit.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "dbafl/dbafl.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kRuntimeError = 2, kAuditFailure = 3 };

int run_and_report(const dbafl::RunManifest& m) {
  for (const auto& p : dbafl::run_manifest(m)) std::cout << p.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for blockchain-backed asynchronous federated learning"};
  app.require_subcommand(1);

  dbafl::RunManifest run_m;
  std::vector<std::uint64_t> run_seeds;
  std::string run_strategy;
  std::string run_attack;
  double run_defense = -1.0;
  auto* run = app.add_subcommand("run", "Run one scenario and write metrics and chain dumps");
  run->add_option("--config", run_m.config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_m.out_dir, "Output directory")->required();
  run->add_option("--seed", run_seeds, "Master seed (repeatable)")->take_all();
  run->add_option("--strategy", run_strategy, "DBAFL, BSFL, FedAVG, LocalOnly or StaticEps:<eps>");
  run->add_option("--attack", run_attack, "poisoning or ddos:<fraction>");
  run->add_option("--defense", run_defense, "Defense threshold theta in [0, 1]");

  dbafl::RunManifest sweep_m;
  std::string sweep_strategies;
  std::string sweep_seeds;
  std::string sweep_attack;
  double sweep_defense = -1.0;
  auto* sweep = app.add_subcommand("sweep", "Run every strategy for every seed");
  sweep->add_option("--config", sweep_m.config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--strategies", sweep_strategies, "Comma-separated strategies")->required();
  sweep->add_option("--seeds", sweep_seeds, "Seed range such as 1-5 or 1,3,7")->required();
  sweep->add_option("--out", sweep_m.out_dir, "Output directory")->default_val("out");
  sweep->add_option("--attack", sweep_attack, "poisoning or ddos:<fraction>");
  sweep->add_option("--defense", sweep_defense, "Defense threshold theta in [0, 1]");

  std::string chain_path;
  auto* audit = app.add_subcommand("audit", "Recompute every block hash and link of a chain dump");
  audit->add_option("--chain", chain_path, "Chain dump file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      run_m.seeds = run_seeds;
      if (!run_strategy.empty()) run_m.strategies = {dbafl::Strategy::parse(run_strategy)};
      if (!run_attack.empty()) run_m.attack = run_attack;
      if (run->count("--defense")) run_m.defense_theta = run_defense;
      return run_and_report(run_m);
    }
    if (*sweep) {
      sweep_m.seeds = dbafl::parse_seed_range(sweep_seeds);
      sweep_m.strategies = dbafl::parse_strategy_list(sweep_strategies);
      if (!sweep_attack.empty()) sweep_m.attack = sweep_attack;
      if (sweep->count("--defense")) sweep_m.defense_theta = sweep_defense;
      return run_and_report(sweep_m);
    }
    if (*audit) {
      const auto r = dbafl::audit_chain(chain_path);
      if (r.ok) {
        std::cout << "Ok\n";
        return kOk;
      }
      std::cout << "FirstBadBlock " << r.first_bad_block << '\n';
      return kAuditFailure;
    }
  } catch (const dbafl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const dbafl::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kAuditFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
