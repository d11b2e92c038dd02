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

// Experiment runner: metrics CSV, chain dumps, audit and seed sweeps.

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dbafl/config.hpp"
#include "dbafl/orchestrator.hpp"

namespace dbafl {

inline constexpr const char* kMetricsHeader =
    "sim_time_s,avg_test_accuracy,global_objective,t_training,t_testing,t_communication,"
    "t_waiting,blocks_appended,current_leader,strategy,seed";

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string metrics_csv(std::span<const MetricsRow> rows, const std::string& strategy,
                               std::uint64_t seed) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& r : rows) {
    for (double v : {r.sim_time_s, r.avg_test_accuracy, r.global_objective, r.t_training,
                     r.t_testing, r.t_communication, r.t_waiting}) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(r.blocks_appended) + ',';
    out += (r.current_leader < 0 ? std::string() : std::to_string(r.current_leader)) + ',';
    out += strategy + ',' + std::to_string(seed) + '\n';
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes next to the target and renames over it.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::filesystem::filesystem_error("cannot replace output file", path, ec);
  }
}

inline AuditResult audit_chain(const std::filesystem::path& dump_path) {
  const auto blocks = parse_chain_dump(read_file(dump_path));
  return audit_blocks(blocks);
}

// "1-5", "1..5", "3" or "1,4,9".
inline std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
      throw ConfigError("seeds", "bad seed '" + std::string(s) + "' in '" + text + "'");
    return v;
  };
  std::vector<std::uint64_t> seeds;
  std::string_view s = text;
  for (auto sep : {std::string_view(".."), std::string_view("-")}) {
    if (auto pos = s.find(sep); pos != std::string_view::npos) {
      const auto lo = number(s.substr(0, pos));
      const auto hi = number(s.substr(pos + sep.size()));
      if (hi < lo) throw ConfigError("seeds", "empty range '" + text + "'");
      for (auto v = lo; v <= hi; ++v) seeds.push_back(v);
      return seeds;
    }
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    seeds.push_back(number(s.substr(start, end - start)));
    start = end + 1;
  }
  return seeds;
}

inline std::vector<Strategy> parse_strategy_list(const std::string& text) {
  std::vector<Strategy> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(Strategy::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// "poisoning" makes the last configured node a poisoner; "ddos:<f>" floods
// with fraction f.
inline void apply_attack_override(ScenarioConfig& cfg, const std::string& text) {
  if (text == "poisoning") {
    cfg.attack.poisoners = {cfg.nodes.back().id};
  } else if (text.rfind("ddos:", 0) == 0) {
    try {
      std::size_t used = 0;
      cfg.attack.ddos.attack_fraction = std::stod(text.substr(5), &used);
      if (used != text.size() - 5) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ConfigError("attack", "bad DDoS fraction in '" + text + "'");
    }
  } else {
    throw ConfigError("attack", "expected poisoning or ddos:<fraction>, got '" + text + "'");
  }
}

struct RunManifest {
  std::string config_path;
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds;   // empty: the config's master_seed
  std::vector<Strategy> strategies;   // empty: the config's strategy
  std::optional<std::string> attack;
  std::optional<double> defense_theta;
};

inline std::string file_stem(const Strategy& s, std::uint64_t seed) {
  std::string name = s.name();
  for (auto& c : name)
    if (c == ':') c = '-';
  return name + "_seed" + std::to_string(seed);
}

// Runs every (strategy, seed) pair and writes <stem>.csv plus <stem>.chain
// for ledger-backed strategies. On failure the files of this invocation are
// removed and the exception propagates.
inline std::vector<std::filesystem::path> run_manifest(const RunManifest& m) {
  ScenarioConfig base = load_scenario(m.config_path);
  if (m.attack) apply_attack_override(base, *m.attack);
  if (m.defense_theta) base.attack.defense = DefensePolicy::threshold(*m.defense_theta);
  const auto strategies = m.strategies.empty() ? std::vector<Strategy>{base.strategy} : m.strategies;
  const auto seeds = m.seeds.empty() ? std::vector<std::uint64_t>{base.master_seed} : m.seeds;

  std::vector<ScenarioConfig> jobs;
  for (const auto& s : strategies) {
    for (auto seed : seeds) {
      ScenarioConfig cfg = base;
      cfg.strategy = s;
      cfg.master_seed = seed;
      cfg.validate();
      jobs.push_back(cfg);
    }
  }

  std::filesystem::create_directories(m.out_dir);
  std::vector<std::filesystem::path> written;
  try {
    for (const auto& cfg : jobs) {
      const auto result = run_scenario(cfg);
      const auto stem = m.out_dir / file_stem(cfg.strategy, cfg.master_seed);
      auto csv = stem;
      csv += ".csv";
      write_file_atomic(csv, metrics_csv(result.rows, cfg.strategy.name(), cfg.master_seed));
      written.push_back(csv);
      if (!result.blocks.empty()) {
        auto chain = stem;
        chain += ".chain";
        write_file_atomic(chain, result.chain_dump());
        written.push_back(chain);
      }
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return written;
}

}  // namespace dbafl
