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

#include <functional>
#include <optional>
#include <vector>

#include "hvsim/bus.hpp"
#include "hvsim/hart.hpp"
#include "hvsim/isa.hpp"
#include "hvsim/trap_engine.hpp"

namespace hvsim {

struct MachineConfig {
    unsigned harts = 1;
    unsigned geilen = 1;
    size_t tlb_capacity = 32;
    MemoryMap map;
    unsigned num_sources = 63;
    unsigned num_blocks = 0;
    unsigned viirs_per_block = 1;
    unsigned mgmt_irq_base = 0;
    unsigned bench_irq = 1;
    uint64_t ticks_per_step = 1;
    MutationSet mutations = 0;

    // Throws std::invalid_argument with a diagnostic.
    void validate() const;
    BusConfig bus_config() const;
};

enum class StepKind : uint8_t { retired, trapped, waiting };

struct StepOutcome {
    StepKind kind = StepKind::retired;
    addr_t pc = 0;            // pc at the start of the step
    uint32_t raw = 0;         // fetched word, 0 when none was fetched
    PrivilegeContext ctx;     // mode at the start of the step
    std::optional<TrapInfo> trap;
    TrapTarget target = TrapTarget::M;
};

struct TrapEvent {
    unsigned hart = 0;
    TrapInfo info;
    PrivilegeContext from;
    TrapTarget target = TrapTarget::M;
};

struct RunResult {
    enum class Stop : uint8_t { exited, budget };
    Stop stop = Stop::budget;
    int exit_code = 0;
    uint64_t steps = 0;
};

class Machine {
public:
    explicit Machine(const MachineConfig& config);

    void reset();

    const MachineConfig& config() const noexcept { return cfg_; }
    unsigned num_harts() const noexcept { return static_cast<unsigned>(harts_.size()); }
    HartState& hart(unsigned i) { return harts_.at(i); }
    const HartState& hart(unsigned i) const { return harts_.at(i); }
    Bus& bus() noexcept { return bus_; }
    const Bus& bus() const noexcept { return bus_; }

    // One instruction or one trap entry on hart i. Does not advance time.
    StepOutcome step(unsigned i);
    // Like step, but executes the given word instead of fetching.
    StepOutcome execute(unsigned i, uint32_t raw);

    // Advances the shared time base by one scheduler round.
    void tick();

    // Round-robin over harts, one step each per round, until the host-exit
    // device fires or max_steps slots have run.
    RunResult run(uint64_t max_steps);

    // Pushes CLINT/PLIC output lines into hart i's CSR file.
    void refresh_lines(unsigned i);

    void set_trap_hook(std::function<void(const TrapEvent&)> hook) { trap_hook_ = std::move(hook); }
    void set_step_hook(std::function<void(unsigned, const StepOutcome&)> hook) {
        step_hook_ = std::move(hook);
    }

    uint64_t rounds() const noexcept { return rounds_; }

private:
    StepOutcome step_impl(unsigned i, std::optional<uint32_t> injected);
    StepOutcome enter_trap(HartState& h, TrapInfo info, StepOutcome out);
    MaybeTrap exec(HartState& h, const Instruction& in, addr_t& next_pc);

    AccessRequest data_request(const HartState& h, addr_t va, AccessKind kind) const;
    AccessRequest hyp_request(const HartState& h, addr_t va, AccessKind kind, bool hlvx) const;
    Result<addr_t> translate_data(HartState& h, const AccessRequest& req, unsigned width);
    Result<uint64_t> load(HartState& h, const AccessRequest& req, unsigned width);
    MaybeTrap store(HartState& h, const AccessRequest& req, unsigned width, uint64_t value);
    MaybeTrap amo(HartState& h, const Instruction& in);
    void invalidate_reservations(addr_t pa);

    MachineConfig cfg_;
    Bus bus_;
    std::vector<HartState> harts_;
    std::function<void(const TrapEvent&)> trap_hook_;
    std::function<void(unsigned, const StepOutcome&)> step_hook_;
    uint64_t rounds_ = 0;
};

} // namespace hvsim
