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

// Event-driven simulation of buses and RSUs running one of the training
// strategies over the latency model, with the ledger and committee in the
// loop.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dbafl/aggregation.hpp"
#include "dbafl/chain.hpp"
#include "dbafl/model.hpp"
#include "dbafl/netsim.hpp"
#include "dbafl/random.hpp"
#include "dbafl/scenario.hpp"

namespace dbafl {

// Adds seeded uniform noise in [-magnitude, magnitude] to every component.
inline ModelParams poison(const ModelParams& params, double magnitude, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  ModelParams out = params;
  for (auto& v : out.values) v += rng.uniform(-magnitude, magnitude);
  return out;
}

inline double average_test_accuracy(std::span<const double> accuracies) {
  if (accuracies.empty()) throw ContractError("average_test_accuracy: no nodes");
  double sum = 0.0;
  for (double a : accuracies) sum += a;
  return sum / static_cast<double>(accuracies.size());
}

// A local model as it reaches the aggregator, with the digest its sender
// put on chain.
struct Upload {
  NodeId node = 0;
  std::uint64_t round = 0;
  ModelParams model;
  HashRecord record;
};

enum class StepOutcome { kAggregated, kIgnoredBlacklisted, kTampered, kDiscarded };

struct StepResult {
  StepOutcome outcome = StepOutcome::kAggregated;
  double acc_local = 0.0;
  double acc_global = 0.0;
  double eps = 0.0;
};

// Blacklist check, digest verification and the defense filter. On success
// the outcome is kAggregated and both accuracies are filled in; nothing is
// aggregated here.
inline StepResult admit_upload(const ModelParams& global, const Dataset& leader_test,
                               const Upload& up, Blockchain& chain,
                               const DefensePolicy& defense) {
  StepResult r;
  if (chain.committee().blacklist.contains(up.node)) {
    r.outcome = StepOutcome::kIgnoredBlacklisted;
    return r;
  }
  if (verify_record(chain, up.model, up.record, chain.committee()) ==
      VerifyResult::kTamperedAndBlacklisted) {
    r.outcome = StepOutcome::kTampered;
    return r;
  }
  r.acc_local = evaluate_accuracy(up.model, leader_test);
  r.acc_global = evaluate_accuracy(global, leader_test);
  if (defense_filter(r.acc_local, r.acc_global, defense) == DefenseVerdict::kDiscard)
    r.outcome = StepOutcome::kDiscarded;
  return r;
}

// One asynchronous aggregation on the committee leader: verify, filter,
// weight, aggregate, then submit the new global digest. `static_eps` replaces
// the accuracy ratio when set.
inline StepResult leader_aggregation_step(ModelParams& global, std::uint64_t& global_version,
                                          NodeId leader, const Dataset& leader_test,
                                          const Upload& up, Blockchain& chain,
                                          const DefensePolicy& defense,
                                          std::optional<double> static_eps, double now_s) {
  StepResult r = admit_upload(global, leader_test, up, chain, defense);
  if (r.outcome != StepOutcome::kAggregated) return r;
  r.eps = static_eps ? *static_eps : scaling_factor(r.acc_local, r.acc_global).value;
  global = aggregate_async(global, up.model, ScalingFactor{r.eps});
  ++global_version;
  chain.submit({RecordKind::kGlobalModelHash, leader, global_version, hash_model(global)}, now_s);
  return r;
}

// Aggregates one synchronous round. FedAVG takes the sample-weighted mean;
// BSFL folds the arrivals into `global` in order with unit weight.
inline ModelParams synchronous_round(const Strategy& strategy, const ModelParams& global,
                                     std::span<const ModelParams> arrivals,
                                     std::span<const std::size_t> sizes) {
  switch (strategy.kind) {
    case Strategy::Kind::kFedAvg:
      return aggregate_fedavg(arrivals, sizes);
    case Strategy::Kind::kBsfl: {
      ModelParams g = global;
      for (const auto& m : arrivals) g = aggregate_async(g, m, ScalingFactor{1.0});
      return g;
    }
    default:
      throw ContractError("synchronous_round: strategy " + strategy.name() + " is not synchronous");
  }
}

enum class Stage : std::size_t { kTraining = 0, kTesting = 1, kCommunication = 2, kWaiting = 3 };

struct NodeStats {
  NodeId id = 0;
  Role role = Role::kBus;
  std::array<double, 4> stage_seconds{};  // indexed by Stage
  std::uint64_t rounds = 0;
  std::uint64_t uploads = 0;

  double total() const { return stage_seconds[0] + stage_seconds[1] + stage_seconds[2] + stage_seconds[3]; }
  double seconds(Stage s) const { return stage_seconds[static_cast<std::size_t>(s)]; }
};

struct AggregationLogEntry {
  double time_s = 0.0;
  NodeId node = 0;
  std::uint64_t round = 0;
  StepOutcome outcome = StepOutcome::kAggregated;
  double eps = 0.0;
  Digest global_before{};
  Digest global_after{};
};

struct SyncRoundLogEntry {
  double time_s = 0.0;
  std::uint64_t version = 0;      // version produced by the round
  std::size_t models = 0;         // uploads consumed
  std::size_t fresh = 0;          // uploads trained from the previous version
};

struct ScenarioResult {
  std::vector<MetricsRow> rows;
  std::vector<std::vector<double>> node_accuracy;  // [row][node]
  std::vector<Block> blocks;
  std::vector<HashRecord> pending;
  std::vector<NodeStats> nodes;
  std::vector<AggregationLogEntry> aggregations;
  std::vector<SyncRoundLogEntry> sync_rounds;
  std::vector<NodeId> leader_history;
  PayloadSizes payload;
  Digest trace_digest{};
  std::size_t events = 0;

  std::string chain_dump() const { return dump_chain(blocks); }
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    setup();
  }

  ScenarioResult run();

 private:
  struct Node {
    NodeConfig cfg;
    Dataset train;
    Dataset test;
    ModelParams current;  // latest local model, used for the metrics
    ModelParams trained;  // produced by the running round, not yet tested
    ModelParams base;     // global model the running round started from
    std::uint64_t base_version = 0;
    double accuracy = 0.0;
    double loss = 0.0;
    double last_eps = 1.0;
    std::uint64_t round = 0;
    std::uint64_t uploads = 0;
    Stage stage = Stage::kWaiting;
    double stage_start = 0.0;
    std::array<double, 4> totals{};
    std::size_t access = 0;  // index of the RSU this node talks to
    std::optional<std::uint64_t> awaiting_version;
  };

  struct Replica {
    ModelParams model;
    std::uint64_t version = 0;
    bool valid = false;
  };

  struct SampleEv {};
  struct TrainDoneEv { std::size_t node; };
  struct TestDoneEv { std::size_t node; };
  struct UploadDoneEv { std::size_t node; };
  struct DownloadDoneEv { std::size_t node; };
  struct HashArriveEv { HashRecord record; };
  struct ModelArriveEv { Upload upload; std::uint64_t base_version; };
  struct ReplicaEv { std::size_t rsu; std::uint64_t version; ModelParams model; };
  struct BlockTimerEv { double first_pending_s; };
  using Event = std::variant<SampleEv, TrainDoneEv, TestDoneEv, UploadDoneEv, DownloadDoneEv,
                             HashArriveEv, ModelArriveEv, ReplicaEv, BlockTimerEv>;

  void setup();
  double now() const { return queue_.now(); }
  void set_stage(Node& n, Stage s);
  std::size_t index_of(NodeId id) const { return index_.at(id); }

  std::size_t server() const;
  std::size_t ddos_target() const;
  double mobile_rate(const Node& n, std::size_t endpoint) const;

  void start_training(std::size_t i);
  void begin_upload(std::size_t i);
  void begin_download(std::size_t i);
  void release_waiting(std::size_t rsu);
  void publish_global(std::size_t leader);
  void build_genesis(std::size_t i);
  void submit(const HashRecord& rec);
  void after_submit();
  void cut_block();
  void sample();

  void handle(const SampleEv&) { sample(); }
  void handle(const TrainDoneEv& e);
  void handle(const TestDoneEv& e);
  void handle(const UploadDoneEv& e);
  void handle(const DownloadDoneEv& e) { start_training(e.node); }
  void handle(const HashArriveEv& e) { submit(e.record); }
  void handle(const ModelArriveEv& e);
  void handle(ReplicaEv& e);
  void handle(const BlockTimerEv& e);

  ScenarioConfig cfg_;
  std::vector<Node> nodes_;
  std::map<NodeId, std::size_t> index_;
  std::vector<std::size_t> rsus_;
  std::vector<Replica> replicas_;  // by node index; only RSUs are used
  bool centralized_ = false;
  PayloadSizes payload_;
  ModelParams global_;
  std::uint64_t global_version_ = 0;
  std::optional<Blockchain> chain_;
  std::vector<Upload> round_buffer_;
  std::vector<std::uint64_t> round_buffer_versions_;
  EventQueue<Event> queue_;
  ScenarioResult result_;
  std::vector<std::uint8_t> trace_;
};

inline void Simulation::setup() {
  const auto& d = cfg_.data;
  std::uint64_t next_id = 0;
  for (std::size_t i = 0; i < cfg_.nodes.size(); ++i) {
    Node n;
    n.cfg = cfg_.nodes[i];
    const auto all = generate_synthetic_dataset(
        derive_seed(cfg_.master_seed, SeedPurpose::kData, n.cfg.id), n.cfg.samples, d.features,
        d.classes, d.separation, next_id);
    next_id += n.cfg.samples;
    const auto n_test =
        static_cast<std::size_t>(static_cast<double>(n.cfg.samples) * d.test_fraction);
    n.train = slice(all, 0, all.size() - n_test);
    n.test = slice(all, all.size() - n_test, all.size());
    index_[n.cfg.id] = i;
    if (n.cfg.role == Role::kRsu) rsus_.push_back(i);
    nodes_.push_back(std::move(n));
  }
  centralized_ = cfg_.fixed_server || cfg_.strategy.kind == Strategy::Kind::kFedAvg;
  std::size_t bus_no = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (rsus_.empty()) {
      n.access = i;
    } else if (centralized_) {
      n.access = rsus_.front();
    } else {
      n.access = n.cfg.role == Role::kRsu ? i : rsus_[bus_no++ % rsus_.size()];
    }
  }

  const auto w_init = initial_params(d.features, d.classes, d.init_scale,
                                     derive_seed(cfg_.master_seed, SeedPurpose::kInit));
  for (auto& n : nodes_) {
    n.current = w_init;
    n.accuracy = evaluate_accuracy(w_init, n.test);
    n.loss = local_loss(w_init, n.train);
  }
  global_ = w_init;
  payload_ = cfg_.payload;
  if (payload_.model_bits == 0.0)
    payload_.model_bits = static_cast<double>(w_init.size() * 64);
  if (payload_.block_bits == 0.0)
    payload_.block_bits = static_cast<double>(block_serialized_size(cfg_.chain_policy.max_records) * 8);
  payload_.validate();
  replicas_.resize(nodes_.size());
}

inline void Simulation::set_stage(Node& n, Stage s) {
  n.totals[static_cast<std::size_t>(n.stage)] += now() - n.stage_start;
  n.stage = s;
  n.stage_start = now();
}

inline std::size_t Simulation::server() const {
  if (chain_ && !centralized_) return index_of(chain_->committee().leader);
  return rsus_.front();
}

// The attacker floods whichever node served aggregation `lag` terms ago; before
// that history exists it floods the bootstrap RSU.
inline std::size_t Simulation::ddos_target() const {
  if (!chain_ || centralized_) return rsus_.front();
  const auto& c = chain_->committee();
  const auto lag = static_cast<std::size_t>(cfg_.attack.ddos.retarget_lag_terms);
  if (c.term_index >= lag) return index_of(c.leader_history[c.term_index - lag]);
  return rsus_.front();
}

inline double Simulation::mobile_rate(const Node& n, std::size_t endpoint) const {
  const bool hit = endpoint == ddos_target() && endpoint == server();
  return ddos_effective_rate(shannon_rate(n.cfg.link), cfg_.attack.ddos, hit);
}

inline void Simulation::start_training(std::size_t i) {
  auto& n = nodes_[i];
  set_stage(n, Stage::kTraining);
  const double t = n.cfg.compute_time_multiplier * cfg_.train.epochs *
                   static_cast<double>(n.train.size()) / 1000.0;
  queue_.schedule(now() + t, TrainDoneEv{i});
}

inline void Simulation::handle(const TrainDoneEv& e) {
  auto& n = nodes_[e.node];
  n.trained = local_train(n.base, n.train, cfg_.train,
                          derive_seed(cfg_.master_seed, SeedPurpose::kTrain, n.cfg.id, n.round));
  set_stage(n, Stage::kTesting);
  const double t = n.cfg.compute_time_multiplier * static_cast<double>(n.test.size()) / 1000.0;
  queue_.schedule(now() + t, TestDoneEv{e.node});
}

inline void Simulation::handle(const TestDoneEv& e) {
  auto& n = nodes_[e.node];
  n.current = n.trained;
  n.accuracy = evaluate_accuracy(n.current, n.test);
  n.loss = local_loss(n.current, n.train);
  ++n.round;
  if (cfg_.strategy.kind == Strategy::Kind::kLocalOnly) {
    n.base = n.current;
    start_training(e.node);
    return;
  }
  if (cfg_.strategy.uses_chain() && !chain_) {
    build_genesis(e.node);
    return;
  }
  begin_upload(e.node);
}

// The bootstrap RSU's first model becomes the initial global model, and both
// digests form block 0.
inline void Simulation::build_genesis(std::size_t i) {
  auto& n = nodes_[i];
  global_ = n.current;
  global_version_ = 0;
  const auto digest = hash_model(global_);
  std::vector<HashRecord> genesis{{RecordKind::kGlobalModelHash, n.cfg.id, 0, digest},
                                  {RecordKind::kLocalModelHash, n.cfg.id, 0, digest}};
  std::optional<NodeId> pinned;
  if (cfg_.fixed_server) pinned = nodes_[rsus_.front()].cfg.id;
  std::vector<NodeId> members;
  for (auto r : rsus_) members.push_back(nodes_[r].cfg.id);
  chain_.emplace(std::move(members), cfg_.term_blocks, cfg_.chain_policy, std::move(genesis),
                 Blockchain::to_ms(now()), pinned);
  publish_global(i);
  set_stage(n, Stage::kWaiting);
  n.awaiting_version = 0;
  release_waiting(n.access);
}

// Makes the current global model available at the leader now and at the
// other RSUs after a backbone transfer.
inline void Simulation::publish_global(std::size_t leader) {
  auto& rep = replicas_[leader];
  rep = Replica{global_, global_version_, true};
  if (!centralized_) {
    const double sync = tx_time(payload_.model_bits, nodes_[leader].cfg.link.ethernet_rate_bps);
    for (auto r : rsus_) {
      if (r == leader) continue;
      queue_.schedule(now() + sync, ReplicaEv{r, global_version_, global_});
    }
  }
  release_waiting(leader);
}

inline void Simulation::handle(ReplicaEv& e) {
  auto& rep = replicas_[e.rsu];
  if (!rep.valid || rep.version < e.version) rep = Replica{std::move(e.model), e.version, true};
  release_waiting(e.rsu);
}

inline void Simulation::release_waiting(std::size_t rsu) {
  const auto& rep = replicas_[rsu];
  if (!rep.valid) return;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.access == rsu && n.awaiting_version && rep.version >= *n.awaiting_version) {
      n.awaiting_version.reset();
      begin_download(i);
    }
  }
}

inline void Simulation::begin_download(std::size_t i) {
  auto& n = nodes_[i];
  const auto& rep = replicas_[n.access];
  n.base = rep.model;
  n.base_version = rep.version;
  double t = 0.0;
  if (n.access != i) t = tx_time(payload_.model_bits, mobile_rate(n, n.access));
  if (t == 0.0) {
    start_training(i);
    return;
  }
  set_stage(n, Stage::kCommunication);
  queue_.schedule(now() + t, DownloadDoneEv{i});
}

inline void Simulation::begin_upload(std::size_t i) {
  auto& n = nodes_[i];
  const auto& atk = cfg_.attack;
  Upload up;
  up.node = n.cfg.id;
  up.round = n.round - 1;
  up.model = n.current;
  if (atk.poisoners.contains(n.cfg.id))
    up.model = poison(up.model, atk.poison_magnitude,
                      derive_seed(cfg_.master_seed, SeedPurpose::kPoison, n.cfg.id, up.round));
  up.record = {RecordKind::kLocalModelHash, n.cfg.id, up.round, hash_model(up.model)};
  if (atk.tamperers.contains(n.cfg.id))
    up.model.values[0] = std::nextafter(up.model.values[0], INFINITY);
  ++n.uploads;

  const double S_w = payload_.model_bits;
  const double S_h = payload_.hash_bits;
  double hash_at = 0.0;   // relative to now
  double own = 0.0;       // the node's own transmission time
  double arrive = 0.0;    // model reaches the aggregator
  const auto srv = server();
  if (centralized_ || n.cfg.role == Role::kBus) {
    // Mobile hop to the access point (the server itself when centralized).
    if (n.access != i) {
      const double rate = mobile_rate(n, n.access);
      hash_at = tx_time(S_h, rate);
      own = tx_time(S_w + S_h, rate);
    }
    arrive = own;
    if (!centralized_ && n.access != srv)
      arrive += tx_time(S_w, nodes_[n.access].cfg.link.ethernet_rate_bps);
  } else if (i != srv) {
    // RSU shares its model with the leader over the backbone.
    const double rate = n.cfg.link.ethernet_rate_bps;
    hash_at = tx_time(S_h, rate);
    own = tx_time(S_w + S_h, rate);
    arrive = own;
  }

  set_stage(n, Stage::kCommunication);
  if (chain_) queue_.schedule(now() + hash_at, HashArriveEv{up.record});
  const auto base_version = n.base_version;
  queue_.schedule(now() + arrive, ModelArriveEv{std::move(up), base_version});
  queue_.schedule(now() + own, UploadDoneEv{i});
}

inline void Simulation::handle(const UploadDoneEv& e) {
  auto& n = nodes_[e.node];
  if (cfg_.strategy.asynchronous()) {
    begin_download(e.node);
    return;
  }
  set_stage(n, Stage::kWaiting);
  n.awaiting_version = n.base_version + 1;
  release_waiting(n.access);
}

inline void Simulation::submit(const HashRecord& rec) {
  chain_->submit(rec, now());
  after_submit();
}

inline void Simulation::after_submit() {
  if (chain_->should_cut(now())) {
    cut_block();
  } else if (chain_->pending().size() == 1) {
    queue_.schedule(now() + chain_->policy().max_wait_s, BlockTimerEv{chain_->first_pending_s()});
  }
}

// Records left over after a full block restart the wait timer.
inline void Simulation::cut_block() {
  chain_->cut(now());
  if (!chain_->pending().empty()) {
    const double due = std::max(now(), chain_->first_pending_s() + chain_->policy().max_wait_s);
    queue_.schedule(due, BlockTimerEv{chain_->first_pending_s()});
  }
}

inline void Simulation::handle(const BlockTimerEv& e) {
  if (!chain_->pending().empty() && chain_->first_pending_s() == e.first_pending_s) cut_block();
}

inline void Simulation::handle(const ModelArriveEv& e) {
  const auto leader = server();
  const auto leader_id = nodes_[leader].cfg.id;
  if (cfg_.strategy.asynchronous()) {
    AggregationLogEntry log{now(), e.upload.node, e.upload.round, {}, 0.0, hash_model(global_), {}};
    std::optional<double> eps;
    if (cfg_.strategy.kind == Strategy::Kind::kStaticEps) eps = cfg_.strategy.static_eps;
    const auto r = leader_aggregation_step(global_, global_version_, leader_id,
                                           nodes_[leader].test, e.upload, *chain_,
                                           cfg_.attack.defense, eps, now());
    log.outcome = r.outcome;
    log.eps = r.eps;
    log.global_after = hash_model(global_);
    result_.aggregations.push_back(log);
    if (r.outcome == StepOutcome::kAggregated) {
      nodes_[index_of(e.upload.node)].last_eps = r.eps;
      // The step put the global digest straight into the pool.
      after_submit();
      publish_global(leader);
    }
    return;
  }

  round_buffer_.push_back(e.upload);
  round_buffer_versions_.push_back(e.base_version);
  if (round_buffer_.size() < nodes_.size()) return;

  SyncRoundLogEntry log;
  log.time_s = now();
  log.models = round_buffer_.size();
  for (auto v : round_buffer_versions_) log.fresh += v == global_version_ ? 1 : 0;
  std::vector<ModelParams> admitted;
  std::vector<std::size_t> sizes;
  for (const auto& up : round_buffer_) {
    AggregationLogEntry entry{now(), up.node, up.round, StepOutcome::kAggregated, 1.0,
                              hash_model(global_), hash_model(global_)};
    if (chain_) {
      const auto r = admit_upload(global_, nodes_[leader].test, up, *chain_, cfg_.attack.defense);
      entry.outcome = r.outcome;
    }
    if (entry.outcome == StepOutcome::kAggregated) {
      admitted.push_back(up.model);
      sizes.push_back(nodes_[index_of(up.node)].train.size());
      nodes_[index_of(up.node)].last_eps = 1.0;
    }
    result_.aggregations.push_back(entry);
  }
  if (!admitted.empty()) global_ = synchronous_round(cfg_.strategy, global_, admitted, sizes);
  ++global_version_;
  log.version = global_version_;
  result_.sync_rounds.push_back(log);
  round_buffer_.clear();
  round_buffer_versions_.clear();
  if (chain_) submit({RecordKind::kGlobalModelHash, leader_id, global_version_, hash_model(global_)});
  publish_global(leader);
}

inline void Simulation::sample() {
  MetricsRow row;
  row.sim_time_s = now();
  std::vector<double> acc;
  std::vector<double> eps;
  std::vector<double> loss;
  std::array<double, 4> stages{};
  for (const auto& n : nodes_) {
    acc.push_back(n.accuracy);
    eps.push_back(n.last_eps);
    loss.push_back(n.loss);
    for (std::size_t s = 0; s < 4; ++s) {
      double v = n.totals[s];
      if (s == static_cast<std::size_t>(n.stage)) v += now() - n.stage_start;
      stages[s] += v;
    }
  }
  const double K = static_cast<double>(nodes_.size());
  row.avg_test_accuracy = average_test_accuracy(acc);
  row.global_objective = global_objective(eps, loss, nodes_.size());
  row.t_training = stages[0] / K;
  row.t_testing = stages[1] / K;
  row.t_communication = stages[2] / K;
  row.t_waiting = stages[3] / K;
  if (chain_) {
    row.blocks_appended = chain_->blocks().size() - 1;
    row.current_leader = chain_->committee().leader;
  } else if (cfg_.strategy.kind == Strategy::Kind::kFedAvg) {
    row.current_leader = nodes_[rsus_.front()].cfg.id;
  }
  result_.rows.push_back(row);
  result_.node_accuracy.push_back(std::move(acc));
}

inline ScenarioResult Simulation::run() {
  const double duration = cfg_.duration_s;
  const auto samples = static_cast<std::size_t>(std::floor(duration / cfg_.metrics_interval_s + 1e-9));
  for (std::size_t k = 0; k <= samples; ++k)
    queue_.schedule(static_cast<double>(k) * cfg_.metrics_interval_s, SampleEv{});

  // Everyone starts from the shared initial model, except in the chain-backed
  // strategies where only the bootstrap RSU trains before block 0 exists.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    n.base = global_;
    if (cfg_.strategy.uses_chain() && i != rsus_.front()) {
      n.awaiting_version = 0;
      n.stage = Stage::kWaiting;
    } else {
      start_training(i);
    }
  }
  if (cfg_.strategy.kind == Strategy::Kind::kFedAvg)
    replicas_[rsus_.front()] = Replica{global_, 0, true};

  while (auto ev = queue_.pop()) {
    if (ev->time_s > duration) break;
    ++result_.events;
    const auto t_bits = std::bit_cast<std::uint64_t>(ev->time_s);
    for (int b = 0; b < 8; ++b) trace_.push_back(static_cast<std::uint8_t>(t_bits >> (8 * b)));
    trace_.push_back(static_cast<std::uint8_t>(ev->event.index()));
    std::visit([this](auto& e) { handle(e); }, ev->event);
  }

  for (auto& n : nodes_) {
    n.totals[static_cast<std::size_t>(n.stage)] += duration - n.stage_start;
    n.stage_start = duration;
    result_.nodes.push_back({n.cfg.id, n.cfg.role, n.totals, n.round, n.uploads});
  }
  if (chain_) {
    result_.blocks = chain_->blocks();
    result_.pending = chain_->pending();
    result_.leader_history = chain_->committee().leader_history;
  }
  result_.payload = payload_;
  result_.trace_digest = hash_bytes(trace_);
  return std::move(result_);
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

}  // namespace dbafl
