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

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dbafl/aggregation.hpp"
#include "dbafl/chain.hpp"
#include "dbafl/errors.hpp"
#include "dbafl/model.hpp"
#include "dbafl/netsim.hpp"

namespace dbafl {

enum class Role { kBus, kRsu };

struct NodeConfig {
  NodeId id = 0;
  Role role = Role::kBus;
  // Simulated seconds of training per epoch per 1000 samples.
  double compute_time_multiplier = 1.0;
  std::size_t samples = 1500;
  LinkParams link;

  bool operator==(const NodeConfig&) const = default;
};

struct Strategy {
  enum class Kind { kDbafl, kBsfl, kFedAvg, kStaticEps, kLocalOnly };
  Kind kind = Kind::kDbafl;
  double static_eps = 1.0;  // only meaningful for kStaticEps

  static Strategy dbafl() { return {Kind::kDbafl, 1.0}; }
  static Strategy bsfl() { return {Kind::kBsfl, 1.0}; }
  static Strategy fedavg() { return {Kind::kFedAvg, 1.0}; }
  static Strategy local_only() { return {Kind::kLocalOnly, 1.0}; }
  static Strategy static_eps_of(double eps) {
    if (!(eps > 0.0)) throw ConfigError("static_epsilon", "must be > 0");
    return {Kind::kStaticEps, eps};
  }

  bool asynchronous() const { return kind == Kind::kDbafl || kind == Kind::kStaticEps; }
  bool synchronous() const { return kind == Kind::kBsfl || kind == Kind::kFedAvg; }
  bool uses_chain() const { return kind != Kind::kFedAvg && kind != Kind::kLocalOnly; }

  std::string name() const {
    switch (kind) {
      case Kind::kDbafl: return "DBAFL";
      case Kind::kBsfl: return "BSFL";
      case Kind::kFedAvg: return "FedAVG";
      case Kind::kLocalOnly: return "LocalOnly";
      case Kind::kStaticEps: {
        std::string s = std::to_string(static_eps);
        s.erase(s.find_last_not_of('0') + 1);
        if (s.back() == '.') s += '0';
        return "StaticEps:" + s;
      }
    }
    return "?";
  }

  // Accepts DBAFL, BSFL, FedAVG, LocalOnly and StaticEps:<eps> (case-insensitive).
  static Strategy parse(const std::string& text) {
    std::string s = text;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "dbafl") return dbafl();
    if (s == "bsfl") return bsfl();
    if (s == "fedavg") return fedavg();
    if (s == "localonly" || s == "local") return local_only();
    for (const std::string prefix : {"staticeps:", "static:"}) {
      if (s.rfind(prefix, 0) == 0) {
        try {
          std::size_t used = 0;
          const double eps = std::stod(s.substr(prefix.size()), &used);
          if (used != s.size() - prefix.size()) throw std::invalid_argument("trailing");
          return static_eps_of(eps);
        } catch (const std::logic_error&) {
          throw ConfigError("strategy", "bad static epsilon in '" + text + "'");
        }
      }
    }
    throw ConfigError("strategy", "unknown strategy '" + text + "'");
  }

  bool operator==(const Strategy&) const = default;
};

struct AttackConfig {
  std::set<NodeId> poisoners;
  double poison_magnitude = 10.0;
  // Nodes whose uploaded model is altered in transit after its digest was
  // recorded (one-ulp change to the first parameter).
  std::set<NodeId> tamperers;
  DdosConfig ddos;
  DefensePolicy defense;

  bool operator==(const AttackConfig&) const = default;
};

struct DataConfig {
  std::size_t features = 4;
  std::size_t classes = 4;
  double separation = 3.0;
  double test_fraction = 0.2;
  double init_scale = 1.0;  // std-dev of the random initial parameters

  bool operator==(const DataConfig&) const = default;
};

struct ScenarioConfig {
  std::vector<NodeConfig> nodes;
  Strategy strategy;
  TrainConfig train;
  DataConfig data;
  BlockCutPolicy chain_policy;
  std::size_t term_blocks = 10;
  // Zero model/block sizes are derived from the actual serializations.
  PayloadSizes payload{0.0, 256.0, 0.0};
  AttackConfig attack;
  // Pin aggregation to the first RSU and route every node straight to it
  // (classic single-server AFL / FedAVG topology).
  bool fixed_server = false;
  double duration_s = 3000.0;
  std::uint64_t master_seed = 1;
  double metrics_interval_s = 10.0;

  bool operator==(const ScenarioConfig&) const = default;

  std::size_t rsu_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes.begin(), nodes.end(), [](const NodeConfig& n) { return n.role == Role::kRsu; }));
  }

  void validate() const {
    if (nodes.empty()) throw ConfigError("nodes", "at least one node is required");
    std::set<NodeId> ids;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      const std::string f = "nodes[" + std::to_string(i) + "]";
      if (!ids.insert(n.id).second) throw ConfigError(f + ".id", "duplicate node id");
      if (!(n.compute_time_multiplier >= 1.0))
        throw ConfigError(f + ".compute_time_multiplier", "must be >= 1");
      n.link.validate(f + ".link");
      const auto test = static_cast<std::size_t>(static_cast<double>(n.samples) * data.test_fraction);
      if (n.samples < data.classes || test < 1 || n.samples - test < 1)
        throw ConfigError(f + ".samples", "too few samples for a train/test split");
    }
    if (strategy.kind != Strategy::Kind::kLocalOnly && rsu_count() == 0)
      throw ConfigError("nodes", "strategy " + strategy.name() + " needs at least one RSU");
    train.validate();
    if (data.features < 1) throw ConfigError("data.features", "must be >= 1");
    if (data.classes < 2 || data.classes > 2 * data.features)
      throw ConfigError("data.classes", "must lie in [2, 2 * features]");
    if (!(data.separation >= 0.0)) throw ConfigError("data.separation", "must be >= 0");
    if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0))
      throw ConfigError("data.test_fraction", "must lie in (0, 1)");
    if (!(data.init_scale >= 0.0)) throw ConfigError("data.init_scale", "must be >= 0");
    chain_policy.validate();
    if (term_blocks < 1) throw ConfigError("chain.term_blocks", "must be >= 1");
    if (payload.model_bits < 0.0) throw ConfigError("payload.model_bits", "must be >= 0");
    if (!(payload.hash_bits > 0.0)) throw ConfigError("payload.hash_bits", "must be > 0");
    if (payload.block_bits < 0.0) throw ConfigError("payload.block_bits", "must be >= 0");
    for (auto p : attack.poisoners)
      if (!ids.contains(p)) throw ConfigError("attack.poisoners", "unknown node id " + std::to_string(p));
    for (auto p : attack.tamperers)
      if (!ids.contains(p)) throw ConfigError("attack.tamperers", "unknown node id " + std::to_string(p));
    if (!(attack.poison_magnitude > 0.0))
      throw ConfigError("attack.poison_magnitude", "must be > 0");
    attack.ddos.validate();
    if (!(attack.defense.theta >= 0.0 && attack.defense.theta <= 1.0))
      throw ConfigError("attack.defense.theta", "must lie in [0, 1]");
    if (attack.defense.mode != DefenseMode::kOff && !strategy.uses_chain())
      throw ConfigError("attack.defense", "strategy " + strategy.name() + " has no testing leader");
    if (!(duration_s > 0.0)) throw ConfigError("duration_s", "must be > 0");
    if (!(metrics_interval_s > 0.0)) throw ConfigError("metrics_interval_s", "must be > 0");
  }
};

// Reference defaults: one RSU and four buses at 4x the RSU training cost.
inline std::vector<NodeConfig> default_nodes(std::size_t rsus = 1, std::size_t buses = 4) {
  std::vector<NodeConfig> nodes;
  NodeId id = 0;
  for (std::size_t i = 0; i < rsus; ++i) nodes.push_back({id++, Role::kRsu, 1.0, 1500, {}});
  for (std::size_t i = 0; i < buses; ++i) nodes.push_back({id++, Role::kBus, 4.0, 1500, {}});
  return nodes;
}

inline ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.nodes = default_nodes();
  return cfg;
}

struct MetricsRow {
  double sim_time_s = 0.0;
  double avg_test_accuracy = 0.0;
  double global_objective = 0.0;
  // Node-averaged cumulative seconds per stage.
  double t_training = 0.0;
  double t_testing = 0.0;
  double t_communication = 0.0;
  double t_waiting = 0.0;
  std::size_t blocks_appended = 0;
  std::int64_t current_leader = -1;

  bool operator==(const MetricsRow&) const = default;
};

}  // namespace dbafl
