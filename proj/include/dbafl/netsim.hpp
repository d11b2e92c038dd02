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

// Link-rate latency model and the discrete-event queue.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "dbafl/errors.hpp"

namespace dbafl {

struct LinkParams {
  double mobile_bandwidth_hz = 20e6;  // B_M
  double mobile_snr = 3.0;            // linear ratio, not dB
  double ethernet_rate_bps = 1e9;     // B_E

  void validate(const std::string& field = "link") const {
    if (!(mobile_bandwidth_hz > 0.0)) throw ConfigError(field + ".mobile_bandwidth_hz", "must be > 0");
    if (!(mobile_snr >= 0.0)) throw ConfigError(field + ".mobile_snr", "must be >= 0");
    if (!(ethernet_rate_bps > 0.0)) throw ConfigError(field + ".ethernet_rate_bps", "must be > 0");
  }
  bool operator==(const LinkParams&) const = default;
};

inline double snr_from_db(double db) { return std::pow(10.0, db / 10.0); }

struct PayloadSizes {
  double model_bits = 0.0;  // S_w
  double hash_bits = 256.0;
  double block_bits = 0.0;

  void validate() const {
    if (!(model_bits > 0.0)) throw ConfigError("payload.model_bits", "must be > 0");
    if (!(hash_bits > 0.0)) throw ConfigError("payload.hash_bits", "must be > 0");
    if (!(block_bits > 0.0)) throw ConfigError("payload.block_bits", "must be > 0");
    if (hash_bits > model_bits) throw ConfigError("payload.hash_bits", "must not exceed model_bits");
  }
  bool operator==(const PayloadSizes&) const = default;
};

struct LatencyBreakdown {
  double t_local = 0.0;
  double t_up = 0.0;
  double t_ag = 0.0;
  double t_bg = 0.0;
  double t_bp = 0.0;
  double t_dn = 0.0;
  double t_bc = 0.0;

  // The three parts of t_up, kept for callers that need them separately.
  double t_up_model = 0.0;
  double t_up_hash = 0.0;
  double t_sync_model = 0.0;
};

// Shannon capacity B_M * log2(1 + snr) in bits per second.
inline double shannon_rate(const LinkParams& link) {
  return link.mobile_bandwidth_hz * std::log2(1.0 + link.mobile_snr);
}

inline double tx_time(double size_bits, double rate_bps) {
  if (!(rate_bps > 0.0)) throw UnreachableLinkError("tx_time: link rate is zero");
  return size_bits / rate_bps;
}

// Per-round latency terms. Local training and block generation are zero in
// the asynchronous blockchain scheme.
inline LatencyBreakdown round_latency(const PayloadSizes& sizes, const LinkParams& link) {
  const double mobile = shannon_rate(link);
  LatencyBreakdown l;
  l.t_up_model = tx_time(sizes.model_bits, mobile);
  l.t_up_hash = tx_time(sizes.hash_bits, mobile);
  l.t_sync_model = tx_time(sizes.model_bits, link.ethernet_rate_bps);
  l.t_up = l.t_up_model + l.t_up_hash + l.t_sync_model;
  l.t_ag = l.t_up_hash + l.t_sync_model;
  l.t_bp = tx_time(sizes.block_bits, mobile);
  l.t_dn = tx_time(sizes.model_bits, mobile);
  l.t_bc = 2.0 * l.t_up_hash + 2.0 * l.t_sync_model + l.t_bp;
  return l;
}

inline constexpr double kUnboundedWindow = std::numeric_limits<double>::infinity();

// Seconds a bus moving at speed_kmh stays inside coverage_m of radio range.
inline double connection_window(double coverage_m, double speed_kmh) {
  if (speed_kmh <= 0.0) return kUnboundedWindow;
  return coverage_m / (speed_kmh / 3.6);
}

struct DdosConfig {
  double attack_fraction = 0.0;
  int retarget_lag_terms = 1;

  void validate() const {
    if (!(attack_fraction >= 0.0 && attack_fraction < 1.0))
      throw ConfigError("attack.ddos.attack_fraction", "must lie in [0, 1)");
    if (retarget_lag_terms < 0)
      throw ConfigError("attack.ddos.retarget_lag_terms", "must be >= 0");
  }
  bool operator==(const DdosConfig&) const = default;
};

// Flooding leaves (1 - fraction) of the link to legitimate traffic, but only
// while the target is serving aggregation.
inline double ddos_effective_rate(double base_rate_bps, const DdosConfig& cfg,
                                  bool target_is_current_server) {
  return target_is_current_server ? base_rate_bps * (1.0 - cfg.attack_fraction) : base_rate_bps;
}

// Min-queue ordered by (time, insertion sequence). The clock advances to the
// time of each popped event and never moves backwards.
template <typename Event>
class EventQueue {
 public:
  struct Scheduled {
    double time_s;
    std::uint64_t seq;
    Event event;
  };

  void schedule(double time_s, Event event) {
    if (!(time_s >= now_)) throw ContractError("EventQueue: cannot schedule in the past");
    heap_.push(Scheduled{time_s, next_seq_++, std::move(event)});
  }

  // std::nullopt marks the end of the simulation.
  std::optional<Scheduled> pop() {
    if (heap_.empty()) return std::nullopt;
    Scheduled s = heap_.top();
    heap_.pop();
    now_ = s.time_s;
    return s;
  }

  double now() const noexcept { return now_; }
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Scheduled& a, const Scheduled& b) const {
      if (a.time_s != b.time_s) return a.time_s > b.time_s;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
};

}  // namespace dbafl
