/*
 * Copyright 2026 The hvsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sstream>

#include "hvsim/bench.hpp"
#include "hvsim/harness.hpp"

using namespace hvsim;

namespace {

LatencyReport run(LatencyMode mode, unsigned samples = 20, uint64_t period = 500) {
    LatencyOptions o;
    o.mode = mode;
    o.samples = samples;
    o.period = period;
    return run_latency(o);
}

} // namespace

TEST(Latency, DirectHasNoHypervisorWork) {
    const LatencyReport r = run(LatencyMode::direct);
    ASSERT_TRUE(r.ok()) << r.error;
    ASSERT_EQ(r.samples.size(), 18u);
    EXPECT_EQ(r.discarded, 2u);
    for (const auto& s : r.samples) {
        EXPECT_EQ(s.hs_traps, 0u);
        EXPECT_EQ(s.hs_instructions, 0u);
        EXPECT_GT(s.ticks, 0u);
    }
    EXPECT_EQ(r.stddev_ticks(), 0.0);
    EXPECT_EQ(r.m_traps, 0u);
}

TEST(Latency, TrapEmulateTakesThreeTraps) {
    const LatencyReport r = run(LatencyMode::trap_emulate);
    ASSERT_TRUE(r.ok()) << r.error;
    for (const auto& s : r.samples) {
        EXPECT_EQ(s.hs_traps, 3u);
        EXPECT_GT(s.hs_instructions, 0u);
    }
    EXPECT_EQ(r.stddev_ticks(), 0.0);
    EXPECT_EQ(r.mean_hs_traps(), 3.0);
}

TEST(Latency, DirectIsFaster) {
    const LatencyReport d = run(LatencyMode::direct);
    const LatencyReport t = run(LatencyMode::trap_emulate);
    ASSERT_TRUE(d.ok() && t.ok());
    EXPECT_LT(d.mean_ticks(), t.mean_ticks());
    EXPECT_GE(t.mean_hs_instructions(), 10.0 * std::max(1.0, d.mean_hs_instructions()));
}

TEST(Latency, SameInterruptIdsInBothModes) {
    const LatencyReport d = run(LatencyMode::direct);
    const LatencyReport t = run(LatencyMode::trap_emulate);
    ASSERT_EQ(d.samples.size(), t.samples.size());
    for (size_t k = 0; k < d.samples.size(); ++k) {
        EXPECT_EQ(d.samples[k].claimed_id, t.samples[k].claimed_id);
        EXPECT_EQ(d.samples[k].claimed_id, Harness::default_config().bench_irq);
    }
}

TEST(Latency, Deterministic) {
    for (LatencyMode m : {LatencyMode::direct, LatencyMode::trap_emulate}) {
        std::ostringstream a, b;
        print_latency_samples(a, run(m));
        print_latency_samples(b, run(m));
        EXPECT_EQ(a.str(), b.str());
        EXPECT_FALSE(a.str().empty());
    }
}

TEST(Latency, PeriodDoesNotChangeLatency) {
    const LatencyReport a = run(LatencyMode::trap_emulate, 10, 300);
    const LatencyReport b = run(LatencyMode::trap_emulate, 10, 900);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(a.mean_ticks(), b.mean_ticks());
}

TEST(Latency, Validation) {
    EXPECT_FALSE(run(LatencyMode::direct, 2).ok());
    EXPECT_FALSE(run(LatencyMode::direct, 10, 10).ok());
    LatencyOptions o;
    o.machine = Harness::default_config();
    o.machine->geilen = 0;
    o.machine->num_blocks = 0;
    const LatencyReport r = run_latency(o);
    EXPECT_FALSE(r.ok());
    EXPECT_NE(r.error.find("geilen"), std::string::npos);
    o.machine = Harness::default_config();
    o.machine->map.ram_size = 1 << 20;
    EXPECT_FALSE(run_latency(o).ok());
}

TEST(Latency, ModeNames) {
    for (LatencyMode m : {LatencyMode::direct, LatencyMode::trap_emulate})
        EXPECT_EQ(latency_mode_from_name(latency_mode_name(m)), m);
    EXPECT_FALSE(latency_mode_from_name("fast"));
}

TEST(Latency, ReportText) {
    std::ostringstream os;
    print_latency(os, run(LatencyMode::direct, 10));
    EXPECT_NE(os.str().find("direct"), std::string::npos);
}
