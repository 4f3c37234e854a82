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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hvsim/machine.hpp"

namespace hvsim {

// direct: the guest owns a VS interrupt file context and claims through a
// stage-2 mapping of it. trap_emulate: the hypervisor takes the physical
// interrupt, injects it through hvip and emulates claim/complete on faults.
enum class LatencyMode : uint8_t { direct, trap_emulate };

const char* latency_mode_name(LatencyMode m);
std::optional<LatencyMode> latency_mode_from_name(const std::string& name);

struct LatencyOptions {
    LatencyMode mode = LatencyMode::direct;
    unsigned samples = 100; // taken, including the discarded warm-up
    unsigned discard = 2;
    uint64_t period = 500; // ticks between timer assertions
    MutationSet mutations = 0;
    // Platform to run on; one hart is used. Defaults to the harness machine.
    std::optional<MachineConfig> machine;
};

struct LatencySample {
    uint64_t ticks = 0;           // assertion to first handler instruction
    uint64_t hs_traps = 0;        // traps taken into HS during this interrupt
    uint64_t hs_instructions = 0; // instructions retired in HS during this interrupt
    uint32_t claimed_id = 0;
};

struct LatencyReport {
    LatencyMode mode = LatencyMode::direct;
    std::vector<LatencySample> samples; // warm-up samples already dropped
    unsigned discarded = 0;
    uint64_t m_traps = 0;
    int exit_code = 0;
    bool completed = false;
    std::string error;

    double mean_ticks() const;
    double stddev_ticks() const;
    uint64_t max_ticks() const;
    double mean_hs_traps() const;
    double mean_hs_instructions() const;
    bool ok() const { return completed && error.empty(); }
};

LatencyReport run_latency(const LatencyOptions& opts);

void print_latency(std::ostream& os, const LatencyReport& r);
// One line per sample: index, ticks, hs traps, hs instructions, id.
void print_latency_samples(std::ostream& os, const LatencyReport& r);

} // namespace hvsim
