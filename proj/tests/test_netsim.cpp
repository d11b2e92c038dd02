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

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "dbafl/netsim.hpp"
#include "dbafl/random.hpp"

namespace dbafl {
namespace {

TEST(ShannonRate, Examples) {
  EXPECT_DOUBLE_EQ(shannon_rate({20e6, 3.0, 1e9}), 40e6);
  EXPECT_EQ(shannon_rate({20e6, 0.0, 1e9}), 0.0);
  EXPECT_DOUBLE_EQ(shannon_rate({1e6, 1.0, 1e9}), 1e6);
  EXPECT_NEAR(snr_from_db(10.0), 10.0, 1e-12);
}

TEST(TxTime, Examples) {
  EXPECT_DOUBLE_EQ(tx_time(80e6, 40e6), 2.0);
  EXPECT_DOUBLE_EQ(tx_time(80e6, 1e9), 0.08);
  EXPECT_DOUBLE_EQ(tx_time(256, 40e6), 6.4e-6);
  EXPECT_THROW(tx_time(1.0, 0.0), UnreachableLinkError);
}

TEST(RoundLatency, ReferenceConfiguration) {
  const auto l = round_latency({80e6, 256, 8e3}, {20e6, 3.0, 1e9});
  const double up_model = 80e6 / 40e6;
  const double up_hash = 256 / 40e6;
  const double sync = 80e6 / 1e9;
  EXPECT_NEAR(l.t_up, up_model + up_hash + sync, 1e-15);
  EXPECT_NEAR(l.t_up, 2.080007, 1e-6);
  EXPECT_NEAR(l.t_ag, 0.080007, 1e-6);
  EXPECT_DOUBLE_EQ(l.t_dn, 2.0);
  EXPECT_DOUBLE_EQ(l.t_bp, 2e-4);
  EXPECT_NEAR(l.t_bc, 2 * 6.4e-6 + 2 * 0.08 + 2e-4, 1e-15);
  EXPECT_NEAR(l.t_bc, 0.16021, 1e-5);
  EXPECT_EQ(l.t_local, 0.0);
  EXPECT_EQ(l.t_bg, 0.0);
}

TEST(RoundLatency, OverheadLimitIsTwiceSync) {
  const auto l = round_latency({80e6, 1e-9, 1e-9}, {20e6, 3.0, 1e9});
  EXPECT_NEAR(l.t_bc, 2 * l.t_sync_model, 1e-12);
  EXPECT_THROW(round_latency({80e6, 256, 8e3}, {20e6, 0.0, 1e9}), UnreachableLinkError);
}

TEST(RoundLatency, MonotoneInRateAndSize) {
  Rng rng(30);
  for (int i = 0; i < 200; ++i) {
    const PayloadSizes s{rng.uniform(1e6, 1e8), rng.uniform(100, 1000), rng.uniform(1e3, 1e5)};
    const LinkParams link{rng.uniform(1e6, 1e8), rng.uniform(0.5, 20), rng.uniform(1e8, 1e10)};
    const auto base = round_latency(s, link);
    LinkParams fast = link;
    fast.mobile_bandwidth_hz *= 2;
    fast.ethernet_rate_bps *= 2;
    const auto quick = round_latency(s, fast);
    PayloadSizes big = s;
    big.model_bits *= 2;
    big.hash_bits *= 2;
    big.block_bits *= 2;
    const auto slow = round_latency(big, link);
    for (auto f : {&LatencyBreakdown::t_up, &LatencyBreakdown::t_ag, &LatencyBreakdown::t_bp,
                   &LatencyBreakdown::t_dn, &LatencyBreakdown::t_bc}) {
      ASSERT_LT(quick.*f, base.*f);
      ASSERT_GT(slow.*f, base.*f);
    }
  }
}

TEST(ConnectionWindow, Examples) {
  EXPECT_DOUBLE_EQ(connection_window(300, 60), 18.0);
  EXPECT_DOUBLE_EQ(connection_window(300, 30), 36.0);
  EXPECT_EQ(connection_window(0, 60), 0.0);
  EXPECT_EQ(connection_window(300, 0), kUnboundedWindow);
}

TEST(DdosEffectiveRate, Examples) {
  EXPECT_DOUBLE_EQ(ddos_effective_rate(40e6, {0.9, 1}, true), 40e6 * (1 - 0.9));
  EXPECT_EQ(ddos_effective_rate(40e6, {0.0, 1}, true), 40e6);
  EXPECT_EQ(ddos_effective_rate(40e6, {0.9, 1}, false), 40e6);
  EXPECT_THROW((DdosConfig{1.0, 1}.validate()), ConfigError);
}

TEST(EventQueue, OrdersByTimeThenInsertion) {
  EventQueue<std::string> q;
  q.schedule(1.0, "late");
  q.schedule(0.5, "early");
  q.schedule(1.0, "late-2");
  EXPECT_EQ(q.pop()->event, "early");
  EXPECT_EQ(q.now(), 0.5);
  EXPECT_EQ(q.pop()->event, "late");
  EXPECT_EQ(q.pop()->event, "late-2");
  EXPECT_FALSE(q.pop().has_value());
}

TEST(EventQueue, RejectsThePast) {
  EventQueue<int> q;
  q.schedule(2.0, 1);
  q.pop();
  EXPECT_THROW(q.schedule(1.0, 2), ContractError);
  EXPECT_NO_THROW(q.schedule(2.0, 3));
}

TEST(EventQueue, ClockIsMonotone) {
  Rng rng(31);
  EventQueue<int> q;
  for (int i = 0; i < 1000; ++i) q.schedule(rng.uniform(0, 100), i);
  double last = 0.0;
  while (auto e = q.pop()) {
    ASSERT_GE(e->time_s, last);
    last = e->time_s;
    if (rng.uniform() < 0.3) q.schedule(last + rng.uniform(0, 5), -1);
    if (q.size() > 5000) break;
  }
}

}  // namespace
}  // namespace dbafl
