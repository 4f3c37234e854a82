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

#include <vector>

#include "hvsim/device.hpp"

namespace hvsim {

struct PlicConfig {
    unsigned num_sources = 63; // IDs 1..num_sources
    unsigned num_harts = 1;
    unsigned geilen = 1;       // VS contexts per hart
    unsigned num_blocks = 0;   // injection blocks
    unsigned viirs_per_block = 1;
    unsigned mgmt_irq_base = 0; // source ID of block 0's management interrupt
    MutationSet mutations = 0;

    // Throws std::invalid_argument with a diagnostic on an illegal config.
    void validate() const;
};

// Virtual interrupt injection register. Raw layout:
//   [9:0] interruptID, [10] inFlight, [31:16] priority.
struct Viir {
    uint16_t id = 0;
    bool in_flight = false;
    uint16_t priority = 0;

    enum class State { empty, pending, in_flight };
    State state() const noexcept {
        if (id == 0) return State::empty;
        return in_flight ? State::in_flight : State::pending;
    }
    bool pending() const noexcept { return state() == State::pending; }

    static Viir decode(uint32_t raw) noexcept;
    uint32_t encode() const noexcept;

    friend bool operator==(const Viir&, const Viir&) = default;
};

// Injection block management and status register. Raw layout:
//   [0] enable event (i) "no VIIR pending", [1] enable event (ii) "complete of a
//   non-present ID", [16] status (i), [17] status (ii), [31:22] offending ID.
struct Ibmsr {
    static constexpr uint32_t kEnableNoPending = 1u << 0;
    static constexpr uint32_t kEnableBadComplete = 1u << 1;
    static constexpr uint32_t kStatusNoPending = 1u << 16;
    static constexpr uint32_t kStatusBadComplete = 1u << 17;
    static constexpr unsigned kAuxShift = 22;

    bool enable_no_pending = false;
    bool enable_bad_complete = false;
    bool status_bad_complete = false; // latched; status (i) is a live level
    uint16_t aux = 0;
};

// PLIC with M, S and GEILEN VS contexts per hart plus injection blocks.
//
// Contexts are numbered c = hart * (2 + geilen) + k, with k = 0 for M, 1 for S
// and 1 + i for VS context i (1..geilen). VCIBIR registers are indexed by
// virtual context v = hart * geilen + (i - 1). A VCIBIR value of 0 detaches;
// value b attaches injection block b - 1.
class Plic final : public Device {
public:
    static constexpr addr_t kPriority = 0x0000000;
    static constexpr addr_t kPending = 0x0001000;
    static constexpr addr_t kEnable = 0x0002000;
    static constexpr addr_t kEnableStride = 0x80;
    static constexpr addr_t kContext = 0x0200000;
    static constexpr addr_t kContextStride = 0x1000;
    static constexpr addr_t kVcibir = 0x4000000;
    static constexpr addr_t kViir = 0x4010000;
    static constexpr addr_t kViirBlockStride = 0x1000;
    static constexpr addr_t kIbmsr = 0x4110000;
    static constexpr addr_t kSize = 0x4200000;

    static constexpr unsigned kMaxSources = 1023;
    static constexpr unsigned kMaxBlocks = 240;
    static constexpr unsigned kMaxViirsPerBlock = 1000;
    static constexpr unsigned kMaxGeilen = 63;
    static constexpr unsigned kMaxContexts = 15872;

    enum class ContextKind : uint8_t { M, S, VS };
    struct ContextId {
        unsigned hart = 0;
        ContextKind kind = ContextKind::M;
        unsigned vs_index = 0; // 1..geilen for VS
    };

    explicit Plic(const PlicConfig& config);

    std::optional<uint64_t> read(addr_t offset, unsigned width) override;
    bool write(addr_t offset, unsigned width, uint64_t value) override;
    void reset() override;

    const PlicConfig& config() const noexcept { return cfg_; }
    unsigned num_contexts() const noexcept { return cfg_.num_harts * (2 + cfg_.geilen); }
    unsigned num_virtual_contexts() const noexcept { return cfg_.num_harts * cfg_.geilen; }
    unsigned context_index(unsigned hart, ContextKind kind, unsigned vs_index = 0) const;
    ContextId context_id(unsigned ctx) const;
    unsigned virtual_context_index(unsigned hart, unsigned vs_index) const;
    unsigned context_of_virtual(unsigned vctx) const;

    // Register addresses, relative to the window base.
    addr_t priority_offset(unsigned id) const { return kPriority + id * 4; }
    addr_t enable_offset(unsigned ctx, unsigned word = 0) const {
        return kEnable + ctx * kEnableStride + word * 4;
    }
    addr_t threshold_offset(unsigned ctx) const { return kContext + ctx * kContextStride; }
    addr_t claim_offset(unsigned ctx) const { return kContext + ctx * kContextStride + 4; }
    addr_t vcibir_offset(unsigned vctx) const { return kVcibir + vctx * 4; }
    addr_t viir_offset(unsigned block, unsigned j) const {
        return kViir + block * kViirBlockStride + j * 4;
    }
    addr_t ibmsr_offset(unsigned block) const { return kIbmsr + block * 4; }
    unsigned enable_words() const noexcept { return (cfg_.num_sources + 1 + 31) / 32; }

    // Device-side input: level of an external interrupt line.
    void set_source_level(unsigned id, bool level);
    bool source_level(unsigned id) const { return sources_.at(id).level; }
    bool source_pending(unsigned id) const { return sources_.at(id).pending; }
    bool source_claimed(unsigned id) const { return sources_.at(id).claimed; }

    void set_priority(unsigned id, uint32_t priority);
    uint32_t priority(unsigned id) const { return sources_.at(id).priority; }
    void set_enable(unsigned ctx, unsigned id, bool on);
    bool enabled(unsigned ctx, unsigned id) const;
    void set_threshold(unsigned ctx, uint32_t threshold);
    uint32_t threshold(unsigned ctx) const { return contexts_.at(ctx).threshold; }

    uint32_t claim(unsigned ctx);
    void complete(unsigned ctx, uint32_t id);

    void viir_write(unsigned block, unsigned j, uint32_t value);
    uint32_t viir_read(unsigned block, unsigned j) const;
    const Viir& viir(unsigned block, unsigned j) const { return blocks_.at(block).viirs.at(j); }
    void vcibir_write(unsigned vctx, uint32_t value);
    uint32_t vcibir_read(unsigned vctx) const { return vcibir_.at(vctx); }
    uint32_t ibmsr_read(unsigned block) const;
    void ibmsr_write(unsigned block, uint32_t value);

    // Notification line of a context: some candidate has priority > threshold.
    bool context_line(unsigned ctx) const { return lines_.at(ctx); }
    unsigned mgmt_source(unsigned block) const { return cfg_.mgmt_irq_base + block; }

private:
    struct Source {
        uint32_t priority = 0;
        bool level = false;
        bool pending = false;
        bool claimed = false;
    };
    struct Context {
        std::vector<uint32_t> enable;
        uint32_t threshold = 0;
    };
    struct Block {
        std::vector<Viir> viirs;
        Ibmsr ibmsr;
    };
    struct Candidate {
        uint32_t priority = 0;
        unsigned id = 0;
        bool virtual_ = false;
        unsigned viir = 0;
    };

    // Attached block of a VS context, if any.
    std::optional<unsigned> attached_block(unsigned ctx) const;
    std::optional<Candidate> best_candidate(unsigned ctx) const;
    bool block_attached(unsigned block) const;
    bool no_pending_condition(unsigned block) const;
    void gateway_update(unsigned id);
    void update();

    PlicConfig cfg_;
    std::vector<Source> sources_; // index = ID, 0 unused
    std::vector<Context> contexts_;
    std::vector<uint32_t> vcibir_;
    std::vector<Block> blocks_;
    std::vector<bool> lines_;
};

} // namespace hvsim
