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

// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance <scenario.json> [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dbafl/dbafl.hpp"

using namespace dbafl;

namespace {

constexpr int kSeeds = 5;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel_err(long double got, long double want) {
  const long double scale = std::max<long double>(std::fabs(want), 1e-300L);
  return static_cast<double>(std::fabs(got - want) / scale);
}

// Mean avg_test_accuracy over the last tenth of the samples.
double final_accuracy(const ScenarioResult& r) {
  const std::size_t n = r.rows.size();
  const std::size_t k = std::max<std::size_t>(1, n / 10);
  double s = 0.0;
  for (std::size_t i = n - k; i < n; ++i) s += r.rows[i].avg_test_accuracy;
  return s / static_cast<double>(k);
}

// First sampled time at which the accuracy reaches 95% of the final value.
double time_to_95(const ScenarioResult& r) {
  const double target = 0.95 * final_accuracy(r);
  for (const auto& row : r.rows)
    if (row.avg_test_accuracy >= target) return row.sim_time_s;
  return INFINITY;
}

ScenarioConfig with(ScenarioConfig cfg, Strategy s, std::uint64_t seed) {
  cfg.strategy = s;
  cfg.master_seed = seed;
  return cfg;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome equation_exactness(const ScenarioConfig&) {
  Rng rng(1001);
  double worst = 0.0;
  auto track = [&](double e) { worst = std::max(worst, e); };
  constexpr int N = 200;
  auto vec = [&](std::size_t d) {
    ModelParams p;
    for (std::size_t i = 0; i < d; ++i) p.values.push_back(rng.uniform(-50.0, 50.0));
    return p;
  };

  for (int t = 0; t < N; ++t) {
    const double a = rng.uniform(-0.1, 1.0);
    const double g = rng.uniform(-0.1, 1.0);
    double num = a < 0.01 ? 0.01 : a;
    double den = g < 0.01 ? 0.01 : g;
    double want = num / den;
    if (want < 0.01) want = 0.01;
    if (want > 100.0) want = 100.0;
    track(rel_err(scaling_factor(a, g).value, want));
  }
  for (int t = 0; t < N; ++t) {
    const auto gp = vec(1 + rng.below(40));
    const auto lp = vec(gp.size());
    const double e = rng.uniform(0.01, 100.0);
    const auto out = aggregate_async(gp, lp, {e});
    const auto st = aggregate_static(gp, lp, e);
    for (std::size_t i = 0; i < gp.size(); ++i) {
      const long double want = (static_cast<long double>(gp.values[i]) + static_cast<long double>(e) * lp.values[i]) /
                                (1.0L + e);
      track(rel_err(out.values[i], want) * (std::fabs(want) < 1.0 ? std::fabs(static_cast<double>(want)) : 1.0));
      track(rel_err(st.values[i], want) * (std::fabs(want) < 1.0 ? std::fabs(static_cast<double>(want)) : 1.0));
    }
  }
  for (int t = 0; t < N; ++t) {
    const std::size_t K = 1 + rng.below(10);
    const std::size_t d = 1 + rng.below(20);
    std::vector<ModelParams> ms;
    std::vector<std::size_t> ns;
    for (std::size_t k = 0; k < K; ++k) {
      ms.push_back(vec(d));
      ns.push_back(1 + rng.below(5000));
    }
    const auto out = aggregate_fedavg(ms, ns);
    for (std::size_t i = 0; i < d; ++i) {
      long double s = 0.0L, w = 0.0L, mag = 0.0L;
      for (std::size_t k = 0; k < K; ++k) {
        s += static_cast<long double>(ns[k]) * ms[k].values[i];
        mag += static_cast<long double>(ns[k]) * std::fabs(ms[k].values[i]);
        w += ns[k];
      }
      // Relative to the magnitude of the summands (cancellation-safe).
      track(static_cast<double>(std::fabs(out.values[i] - s / w) / (mag / w)));
    }
  }
  for (int t = 0; t < N; ++t) {
    const std::size_t M = 1 + rng.below(12);
    std::vector<double> p(M);
    for (auto& v : p) v = rng.uniform();
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    long double num = 0.0L, sum = 0.0L;
    for (std::size_t i = 0; i < M; ++i) {
      num += (2.0L * (i + 1) - M - 1) * sorted[i];
      sum += sorted[i];
    }
    const long double want = num / (M * sum);
    if (want == 0.0L)
      track(std::fabs(gini(p)));
    else
      track(rel_err(gini(p), want));
  }
  for (int t = 0; t < N; ++t) {
    const std::size_t K = 1 + rng.below(30);
    std::vector<double> e(K), h(K);
    long double want = 0.0L;
    for (std::size_t k = 0; k < K; ++k) {
      e[k] = rng.uniform(0.01, 100.0);
      h[k] = rng.uniform(0.0, 10.0);
      want += static_cast<long double>(e[k]) * h[k];
    }
    track(rel_err(global_objective(e, h, K), want / K));
  }
  for (int t = 0; t < N; ++t) {
    const LinkParams link{rng.uniform(1e5, 1e9), rng.uniform(0.01, 1000.0), rng.uniform(1e6, 1e11)};
    const PayloadSizes s{rng.uniform(1e3, 1e9), rng.uniform(1.0, 1e3), rng.uniform(1e2, 1e7)};
    const long double rate = link.mobile_bandwidth_hz * std::log1p(static_cast<long double>(link.mobile_snr)) /
                             std::log(2.0L);
    track(rel_err(shannon_rate(link), rate));
    track(rel_err(tx_time(s.model_bits, link.ethernet_rate_bps),
                  static_cast<long double>(s.model_bits) / link.ethernet_rate_bps));
    const auto l = round_latency(s, link);
    const long double up_m = s.model_bits / rate, up_h = s.hash_bits / rate;
    const long double sync = static_cast<long double>(s.model_bits) / link.ethernet_rate_bps;
    const long double bp = s.block_bits / rate, dn = s.model_bits / rate;
    track(rel_err(l.t_up, up_m + up_h + sync));
    track(rel_err(l.t_ag, up_h + sync));
    track(rel_err(l.t_bp, bp));
    track(rel_err(l.t_dn, dn));
    track(rel_err(l.t_bc, 2 * up_h + 2 * sync + bp));
    if (l.t_local != 0.0 || l.t_bg != 0.0) track(1.0);
    const double cov = rng.uniform(1.0, 2000.0);
    const double speed = rng.uniform(1.0, 200.0);
    track(rel_err(connection_window(cov, speed), static_cast<long double>(cov) * 3.6L / speed));
  }
  const bool mobility = connection_window(300.0, 60.0) == 18.0;
  return {worst <= 1e-12 && mobility,
          "max relative error " + fmt(worst, 3) + " over 10 formulas x " + std::to_string(N) +
              " inputs (tol 1e-12); window(300 m, 60 km/h) = " + fmt(connection_window(300.0, 60.0), 17) + " s"};
}

Outcome election_fairness(const ScenarioConfig&) {
  Rng rng(2002);
  std::vector<std::size_t> obs;
  obs.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    Digest d;
    for (std::size_t b = 0; b < d.size(); b += 8) {
      const auto v = rng.next_u64();
      for (std::size_t j = 0; j < 8; ++j) d[b + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    obs.push_back(elect_leader(d, 5));
  }
  const auto p = leader_probabilities(obs, 5);
  const double g = gini(p);
  bool ok = g < 0.05;
  std::string freq;
  for (double v : p) {
    ok = ok && v >= 0.19 && v <= 0.21;
    freq += (freq.empty() ? "" : " ") + fmt(v, 4);
  }
  return {ok, "frequencies [" + freq + "] in [0.19, 0.21]; Gini " + fmt(g, 3) + " < 0.05"};
}

Outcome chain_integrity(const ScenarioConfig& base) {
  auto cfg = with(base, Strategy::dbafl(), 1);
  cfg.duration_s = 1500;
  const auto r = run_scenario(cfg);
  const auto dump = r.chain_dump();
  bool ok = audit_blocks(parse_chain_dump(dump)).ok;

  std::size_t flips = 0, misses = 0;
  auto blocks = parse_chain_dump(dump);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (auto& rec : blocks[b].records) {
      for (std::size_t byte = 0; byte < rec.digest.size(); ++byte) {
        rec.digest[byte] ^= 0x01;
        const auto res = audit_blocks(blocks);
        rec.digest[byte] ^= 0x01;
        ++flips;
        if (res.ok || res.first_bad_block != b) ++misses;
      }
    }
  }
  ok = ok && misses == 0 && flips > 0;

  // One-ulp tamper, blacklist for the rest of the term, accepted next term.
  const auto test = generate_synthetic_dataset(3, 300, 4, 4, 3.0);
  ModelParams global = initial_params(4, 4, 1.0, 1);
  Blockchain chain({0, 1, 2}, 2, {}, {{RecordKind::kGlobalModelHash, 0, 0, hash_model(global)}}, 0);
  const ModelParams local = local_train(global, test, {}, 0);
  auto upload_for = [&](std::uint64_t round) {
    Upload u{7, round, local, {RecordKind::kLocalModelHash, 7, round, hash_model(local)}};
    chain.submit(u.record, 0.0);
    return u;
  };
  std::uint64_t version = 0;
  auto g = global;
  auto tampered = upload_for(1);
  tampered.model.values[3] = std::nextafter(tampered.model.values[3], INFINITY);
  const auto v = verify_record(chain, tampered.model, tampered.record, chain.committee());
  const auto during = leader_aggregation_step(g, version, 0, test, upload_for(2), chain, {}, {}, 0.0);
  const bool unchanged = bitwise_equal(g, global);
  chain.cut(1.0);
  const auto still = leader_aggregation_step(g, version, 0, test, upload_for(3), chain, {}, {}, 1.0);
  chain.cut(2.0);  // second block of the term: new election
  const auto after = leader_aggregation_step(g, version, 0, test, upload_for(4), chain, {}, {}, 2.0);
  const bool tamper_ok = v == VerifyResult::kTamperedAndBlacklisted &&
                         during.outcome == StepOutcome::kIgnoredBlacklisted && unchanged &&
                         still.outcome == StepOutcome::kIgnoredBlacklisted &&
                         after.outcome == StepOutcome::kAggregated;
  ok = ok && tamper_ok;
  return {ok, "audit Ok on a " + std::to_string(blocks.size()) + "-block run; " + std::to_string(flips) +
                  " single-byte digest flips, " + std::to_string(misses) +
                  " not reported at their block; ulp tamper blacklisted until next term: " +
                  (tamper_ok ? "yes" : "no")};
}

struct StrategyRuns {
  std::vector<double> final_acc;
  std::vector<double> t95;
};

StrategyRuns run_seeds(const ScenarioConfig& base, Strategy s, const std::function<void(ScenarioConfig&)>& tweak = {}) {
  StrategyRuns out;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    auto cfg = with(base, s, static_cast<std::uint64_t>(seed));
    if (tweak) tweak(cfg);
    const auto r = run_scenario(cfg);
    out.final_acc.push_back(final_accuracy(r));
    out.t95.push_back(time_to_95(r));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Outcome convergence_advantage(const ScenarioConfig& base) {
  const auto dbafl = run_seeds(base, Strategy::dbafl());
  const auto fedavg = run_seeds(base, Strategy::fedavg());
  const std::vector<StrategyRuns> baselines{fedavg, run_seeds(base, Strategy::bsfl()),
                                            run_seeds(base, Strategy::local_only())};
  int faster = 0;
  std::string ratios;
  for (int s = 0; s < kSeeds; ++s) {
    const double ratio = dbafl.t95[s] / fedavg.t95[s];
    faster += ratio <= 0.6;
    ratios += (ratios.empty() ? "" : " ") + fmt(ratio, 3);
  }
  double worst_gap = INFINITY;
  for (const auto& b : baselines)
    for (int s = 0; s < kSeeds; ++s) worst_gap = std::min(worst_gap, dbafl.final_acc[s] - b.final_acc[s]);
  return {faster >= 4 && worst_gap >= -0.02,
          "t95(DBAFL)/t95(FedAVG) per seed [" + ratios + "], " + std::to_string(faster) +
              "/5 <= 0.6; min final(DBAFL) - final(baseline) = " + fmt(worst_gap, 3) + " >= -0.02"};
}

Outcome dynamic_vs_static(const ScenarioConfig& base) {
  const auto dynamic = run_seeds(base, Strategy::dbafl());
  std::vector<double> best(kSeeds, -INFINITY);
  for (double eps : {0.5, 1.0, 1.5}) {
    const auto st = run_seeds(base, Strategy::static_eps_of(eps));
    for (int s = 0; s < kSeeds; ++s) best[s] = std::max(best[s], st.final_acc[s]);
  }
  double worst = INFINITY;
  for (int s = 0; s < kSeeds; ++s) worst = std::min(worst, dynamic.final_acc[s] - best[s]);
  return {worst >= -0.01, "min over seeds of final(dynamic) - max static final = " + fmt(worst, 3) + " >= -0.01"};
}

Outcome poisoning_resilience(const ScenarioConfig& base) {
  const double magnitude = base.attack.poison_magnitude;
  const NodeId poisoner = base.nodes.back().id;

  // Calibration on clean data: a trained separator, poisoned, must fall below 0.6.
  const auto& d = base.data;
  const auto train = generate_synthetic_dataset(11, 1200, d.features, d.classes, d.separation);
  const auto test = generate_synthetic_dataset(12, 600, d.features, d.classes, d.separation);
  const auto w = local_train(initial_params(d.features, d.classes, d.init_scale, 13), train, {200, 0.1, 1500}, 0);
  double poisoned = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) poisoned += evaluate_accuracy(poison(w, magnitude, s), test) / 20.0;

  const auto clean = run_seeds(base, Strategy::dbafl());
  const auto no_defense = run_seeds(base, Strategy::static_eps_of(1.0), [&](ScenarioConfig& c) {
    c.fixed_server = true;
    c.attack.poisoners = {poisoner};
  });
  std::size_t discarded = 0, violations = 0;
  std::vector<double> defended;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    auto cfg = with(base, Strategy::dbafl(), static_cast<std::uint64_t>(seed));
    cfg.attack.poisoners = {poisoner};
    cfg.attack.defense = DefensePolicy::threshold(0.9);
    const auto r = run_scenario(cfg);
    defended.push_back(final_accuracy(r));
    for (const auto& a : r.aggregations) {
      if (a.outcome != StepOutcome::kDiscarded) continue;
      ++discarded;
      violations += a.global_before != a.global_after;
    }
  }
  const double drop = mean(clean.final_acc) - mean(no_defense.final_acc);
  const double gap = std::fabs(mean(clean.final_acc) - mean(defended));
  return {poisoned < 0.6 && drop >= 0.15 && gap <= 0.03 && discarded > 0 && violations == 0,
          "magnitude " + fmt(magnitude) + " gives poisoned accuracy " + fmt(poisoned, 3) +
              " < 0.6; 5-seed mean: clean " + fmt(mean(clean.final_acc)) + ", no-defense AFL " +
              fmt(mean(no_defense.final_acc)) + " (drop " + fmt(drop, 3) + " >= 0.15), DBAFL theta=0.9 " +
              fmt(mean(defended)) + " (gap " + fmt(gap, 3) + " <= 0.03); " + std::to_string(discarded) +
              " discards, " + std::to_string(violations) + " changed the global model"};
}

Outcome ddos_resilience(const ScenarioConfig& base) {
  std::vector<double> fixed, rotating;
  for (double f : {0.0, 0.8, 0.9}) {
    fixed.push_back(mean(run_seeds(base, Strategy::dbafl(), [&](ScenarioConfig& c) {
                      c.fixed_server = true;
                      c.attack.ddos = {f, 1};
                    }).t95));
    rotating.push_back(mean(run_seeds(base, Strategy::dbafl(), [&](ScenarioConfig& c) {
                         c.attack.ddos = {f, 1};
                       }).t95));
  }
  const bool monotone = fixed[0] < fixed[1] && fixed[1] < fixed[2];
  const auto [lo, hi] = std::minmax_element(rotating.begin(), rotating.end());
  const double spread = (*hi - *lo) / *lo;
  return {monotone && spread < 0.10,
          "5-seed mean time-to-95% at f = 0 / 0.8 / 0.9: fixed server " + fmt(fixed[0]) + " / " + fmt(fixed[1]) +
              " / " + fmt(fixed[2]) + " s (strictly increasing), rotating leader " + fmt(rotating[0]) + " / " +
              fmt(rotating[1]) + " / " + fmt(rotating[2]) + " s (spread " + fmt(100 * spread, 3) + "% < 10%)"};
}

// Seconds of communication per upload for the buses of a run.
double bus_comm_per_round(const ScenarioResult& r) {
  double comm = 0.0, rounds = 0.0;
  for (const auto& n : r.nodes) {
    if (n.role != Role::kBus || n.uploads == 0) continue;
    comm += n.seconds(Stage::kCommunication);
    rounds += static_cast<double>(n.uploads);
  }
  return comm / rounds;
}

Outcome latency_properties(const ScenarioConfig& base) {
  Rng rng(8008);
  int violations = 0, general = 0;
  for (int i = 0; i < 1000; ++i) {
    const double sw = rng.uniform(1e3, 1e10);
    const PayloadSizes sizes{sw, sw / 1000, sw / 100};
    const double bm = rng.uniform(1e3, 1e10);
    const double snr = rng.uniform(1e-3, 1e4);
    const double mobile = shannon_rate({bm, snr, 1.0});
    const LinkParams any{bm, snr, rng.uniform(1e3, 1e12)};
    const LinkParams backbone{bm, snr, mobile * rng.uniform(1.0, 1e4)};
    const auto l = round_latency(sizes, backbone);
    violations += !(l.t_bc < l.t_up + l.t_dn);
    const auto g = round_latency(sizes, any);
    general += !(g.t_bc < g.t_up + g.t_dn);
  }
  auto def = default_scenario();
  def.duration_s = 1500;
  const auto run = run_scenario(def);
  const auto& link = def.nodes.back().link;
  const double rate = shannon_rate(link);
  const double closed = (run.payload.model_bits + run.payload.hash_bits) / rate + run.payload.model_bits / rate;
  const double default_comm = bus_comm_per_round(run);
  auto acc = with(base, Strategy::dbafl(), 1);
  acc.duration_s = 1500;
  const double scenario_comm = bus_comm_per_round(run_scenario(acc));
  const bool ok = violations == 0 && closed < 5.0 && 5.0 < connection_window(300.0, 60.0) && default_comm < 5.0 &&
                  scenario_comm < 5.0;
  return {ok, std::to_string(violations) + "/1000 links with B_E >= mobile rate have t_bc >= t_up + t_dn (" +
                  std::to_string(general) + "/1000 with unconstrained B_E, reported only); default config: " +
                  "t_up + t_dn = " + fmt(closed, 3) + " s, simulated bus communication per round " +
                  fmt(default_comm, 3) + " s; acceptance scenario (" + fmt(base.payload.model_bits / 1e6) +
                  " Mbit model) " + fmt(scenario_comm, 3) + " s; all < 5 s < 18 s window"};
}

Outcome determinism_and_stages(const ScenarioConfig& base) {
  bool identical = true;
  double worst_sum = 0.0;
  for (auto s : {Strategy::dbafl(), Strategy::bsfl(), Strategy::fedavg(), Strategy::static_eps_of(0.5),
                 Strategy::local_only()}) {
    auto cfg = with(base, s, 3);
    cfg.duration_s = 2000;
    cfg.attack.poisoners = {cfg.nodes.back().id};
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    identical = identical && metrics_csv(a.rows, s.name(), 3) == metrics_csv(b.rows, s.name(), 3) &&
                a.chain_dump() == b.chain_dump();
    for (const auto& n : a.nodes) worst_sum = std::max(worst_sum, std::fabs(n.total() - cfg.duration_s));
  }

  auto waiting_share = [&](Strategy s, bool buses_only) {
    const auto r = run_scenario(with(base, s, 1));
    double wait = 0.0, total = 0.0;
    for (const auto& n : r.nodes) {
      if (buses_only && n.role != Role::kBus) continue;
      wait += n.seconds(Stage::kWaiting);
      total += n.total();
    }
    return wait / total;
  };
  const double dbafl_bus = waiting_share(Strategy::dbafl(), true);
  const double fedavg_all = waiting_share(Strategy::fedavg(), false);
  return {identical && worst_sum <= 1e-9 && dbafl_bus < 0.10 && fedavg_all > 0.30,
          std::string("repeat runs byte-identical: ") + (identical ? "yes" : "no") + "; max |stage sum - elapsed| " +
              fmt(worst_sum, 3) + " s (tol 1e-9); waiting share: DBAFL buses " + fmt(100 * dbafl_bus, 3) +
              "% < 10%, FedAVG nodes " + fmt(100 * fedavg_all, 3) + "% > 30%"};
}

struct Criterion {
  int number;
  const char* name;
  double limit_s;
  Outcome (*check)(const ScenarioConfig&);
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <scenario.json> [criterion...]\n";
    return 2;
  }
  ScenarioConfig base;
  try {
    base = load_scenario(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  std::vector<int> only;
  for (int i = 2; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  const Criterion criteria[] = {
      {1, "equation exactness", 1.0, equation_exactness},
      {2, "election fairness", 10.0, election_fairness},
      {3, "chain integrity and tamper detection", 5.0, chain_integrity},
      {4, "convergence advantage", 120.0, convergence_advantage},
      {5, "dynamic vs static epsilon", 180.0, dynamic_vs_static},
      {6, "poisoning resilience", 180.0, poisoning_resilience},
      {7, "DDoS resilience", 180.0, ddos_resilience},
      {8, "latency model properties", 1.0, latency_properties},
      {9, "determinism and stage accounting", 120.0, determinism_and_stages},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check(base);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.number << ". " << c.name << ": " << o.detail << " ("
              << fmt(secs, 3) << " s, limit " << fmt(c.limit_s) << " s" << (in_time ? "" : ", TOO SLOW") << ")"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
