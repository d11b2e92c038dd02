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

// Scenario files: JSON with every field optional. Omitted fields take the
// reference defaults.

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dbafl/scenario.hpp"

namespace dbafl {

namespace detail {

using json = nlohmann::json;

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
        if (std::is_unsigned_v<T> && v->is_number_integer() && !v->is_number_unsigned())
          throw ConfigError(field(key), "must be >= 0");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw ConfigError(field(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline LinkParams read_link(const json& j, const std::string& path, LinkParams link) {
  ObjectReader r(j, path);
  r.get("mobile_bandwidth_hz", link.mobile_bandwidth_hz);
  r.get("mobile_snr", link.mobile_snr);
  if (r.find("mobile_snr_db")) {
    if (j.contains("mobile_snr") && !j["mobile_snr"].is_null())
      throw ConfigError(r.field("mobile_snr_db"), "give mobile_snr or mobile_snr_db, not both");
    double db = 0.0;
    r.get("mobile_snr_db", db);
    link.mobile_snr = snr_from_db(db);
  }
  r.get("ethernet_rate_bps", link.ethernet_rate_bps);
  r.finish();
  return link;
}

inline Role read_role(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected \"rsu\" or \"bus\"");
  auto s = j.get<std::string>();
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "rsu") return Role::kRsu;
  if (s == "bus") return Role::kBus;
  throw ConfigError(field, "expected \"rsu\" or \"bus\", got '" + s + "'");
}

inline std::set<NodeId> read_ids(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected a list of node ids");
  std::set<NodeId> out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) throw ConfigError(field, "node ids are non-negative integers");
    out.insert(v.get<NodeId>());
  }
  return out;
}

// "nodes" is either an explicit list or a {rsus, buses, ...} shorthand.
inline std::vector<NodeConfig> read_nodes(const json& j) {
  std::vector<NodeConfig> nodes;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string path = "nodes[" + std::to_string(i) + "]";
      ObjectReader r(j[i], path);
      NodeConfig n;
      n.id = static_cast<NodeId>(i);
      r.get("id", n.id);
      if (const auto* role = r.find("role")) n.role = read_role(*role, r.field("role"));
      n.compute_time_multiplier = n.role == Role::kRsu ? 1.0 : 4.0;
      r.get("compute_time_multiplier", n.compute_time_multiplier);
      r.get("samples", n.samples);
      if (const auto* link = r.find("link")) n.link = read_link(*link, r.field("link"), n.link);
      r.finish();
      nodes.push_back(n);
    }
    return nodes;
  }
  ObjectReader r(j, "nodes");
  std::size_t rsus = 1;
  std::size_t buses = 4;
  double rsu_mult = 1.0;
  double bus_mult = 4.0;
  std::size_t samples = 1500;
  LinkParams link;
  r.get("rsus", rsus);
  r.get("buses", buses);
  r.get("rsu_multiplier", rsu_mult);
  r.get("bus_multiplier", bus_mult);
  r.get("samples", samples);
  if (const auto* l = r.find("link")) link = read_link(*l, "nodes.link", link);
  r.finish();
  nodes = default_nodes(rsus, buses);
  for (auto& n : nodes) {
    n.compute_time_multiplier = n.role == Role::kRsu ? rsu_mult : bus_mult;
    n.samples = samples;
    n.link = link;
  }
  return nodes;
}

}  // namespace detail

// Parses scenario JSON text. Throws ConfigError naming the offending field.
inline ScenarioConfig parse_scenario(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  ScenarioConfig cfg = default_scenario();
  detail::ObjectReader r(j, "");
  if (const auto* n = r.find("nodes")) cfg.nodes = detail::read_nodes(*n);
  if (const auto* s = r.find("strategy")) {
    if (!s->is_string()) throw ConfigError("strategy", "expected a string");
    cfg.strategy = Strategy::parse(s->get<std::string>());
  }
  if (r.find("static_epsilon")) {
    double eps = 0.0;
    r.get("static_epsilon", eps);
    cfg.strategy = Strategy::static_eps_of(eps);
  }
  if (const auto* t = r.find("train")) {
    detail::ObjectReader tr(*t, "train");
    tr.get("epochs", cfg.train.epochs);
    tr.get("learning_rate", cfg.train.learning_rate);
    tr.get("batch_size", cfg.train.batch_size);
    tr.finish();
  }
  if (const auto* d = r.find("data")) {
    detail::ObjectReader dr(*d, "data");
    dr.get("features", cfg.data.features);
    dr.get("classes", cfg.data.classes);
    dr.get("separation", cfg.data.separation);
    dr.get("test_fraction", cfg.data.test_fraction);
    dr.get("init_scale", cfg.data.init_scale);
    dr.finish();
  }
  if (const auto* c = r.find("chain")) {
    detail::ObjectReader cr(*c, "chain");
    cr.get("max_wait_s", cfg.chain_policy.max_wait_s);
    cr.get("max_records", cfg.chain_policy.max_records);
    cr.get("max_block_bytes", cfg.chain_policy.max_block_bytes);
    cr.get("term_blocks", cfg.term_blocks);
    cr.get("fixed_server", cfg.fixed_server);
    cr.finish();
  }
  if (const auto* p = r.find("payload")) {
    detail::ObjectReader pr(*p, "payload");
    pr.get("model_bits", cfg.payload.model_bits);
    pr.get("hash_bits", cfg.payload.hash_bits);
    pr.get("block_bits", cfg.payload.block_bits);
    pr.finish();
  }
  if (const auto* a = r.find("attack")) {
    detail::ObjectReader ar(*a, "attack");
    if (const auto* p = ar.find("poisoners")) cfg.attack.poisoners = detail::read_ids(*p, "attack.poisoners");
    ar.get("poison_magnitude", cfg.attack.poison_magnitude);
    if (const auto* p = ar.find("tamperers")) cfg.attack.tamperers = detail::read_ids(*p, "attack.tamperers");
    if (const auto* dd = ar.find("ddos")) {
      detail::ObjectReader dr(*dd, "attack.ddos");
      dr.get("attack_fraction", cfg.attack.ddos.attack_fraction);
      dr.get("retarget_lag_terms", cfg.attack.ddos.retarget_lag_terms);
      dr.finish();
    }
    if (ar.find("defense_theta")) {
      double theta = 0.0;
      ar.get("defense_theta", theta);
      cfg.attack.defense = DefensePolicy::threshold(theta);
    }
    ar.finish();
  }
  r.get("duration_s", cfg.duration_s);
  r.get("master_seed", cfg.master_seed);
  r.get("metrics_interval_s", cfg.metrics_interval_s);
  r.finish();
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// Writes every field explicitly; parse_scenario(serialize_scenario(c)) == c.
inline std::string serialize_scenario(const ScenarioConfig& cfg) {
  using detail::json;
  json j;
  json nodes = json::array();
  for (const auto& n : cfg.nodes) {
    nodes.push_back({{"id", n.id},
                     {"role", n.role == Role::kRsu ? "rsu" : "bus"},
                     {"compute_time_multiplier", n.compute_time_multiplier},
                     {"samples", n.samples},
                     {"link",
                      {{"mobile_bandwidth_hz", n.link.mobile_bandwidth_hz},
                       {"mobile_snr", n.link.mobile_snr},
                       {"ethernet_rate_bps", n.link.ethernet_rate_bps}}}});
  }
  j["nodes"] = nodes;
  if (cfg.strategy.kind == Strategy::Kind::kStaticEps) {
    j["static_epsilon"] = cfg.strategy.static_eps;
  } else {
    j["strategy"] = cfg.strategy.name();
  }
  j["train"] = {{"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"batch_size", cfg.train.batch_size}};
  j["data"] = {{"features", cfg.data.features},
               {"classes", cfg.data.classes},
               {"separation", cfg.data.separation},
               {"test_fraction", cfg.data.test_fraction},
               {"init_scale", cfg.data.init_scale}};
  j["chain"] = {{"max_wait_s", cfg.chain_policy.max_wait_s},
                {"max_records", cfg.chain_policy.max_records},
                {"max_block_bytes", cfg.chain_policy.max_block_bytes},
                {"term_blocks", cfg.term_blocks},
                {"fixed_server", cfg.fixed_server}};
  j["payload"] = {{"model_bits", cfg.payload.model_bits},
                  {"hash_bits", cfg.payload.hash_bits},
                  {"block_bits", cfg.payload.block_bits}};
  json attack = {{"poisoners", cfg.attack.poisoners},
                 {"poison_magnitude", cfg.attack.poison_magnitude},
                 {"tamperers", cfg.attack.tamperers},
                 {"ddos",
                  {{"attack_fraction", cfg.attack.ddos.attack_fraction},
                   {"retarget_lag_terms", cfg.attack.ddos.retarget_lag_terms}}}};
  if (cfg.attack.defense.mode == DefenseMode::kThresholdFraction)
    attack["defense_theta"] = cfg.attack.defense.theta;
  j["attack"] = attack;
  j["duration_s"] = cfg.duration_s;
  j["master_seed"] = cfg.master_seed;
  j["metrics_interval_s"] = cfg.metrics_interval_s;
  return j.dump(2) + "\n";
}

}  // namespace dbafl
