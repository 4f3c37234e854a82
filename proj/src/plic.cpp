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

#include "hvsim/plic.hpp"

#include <stdexcept>
#include <string>

namespace hvsim {

void PlicConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("plic: " + msg); };
    if (num_sources == 0 || num_sources > Plic::kMaxSources)
        fail("num_sources must be in 1..1023");
    if (num_harts == 0) fail("num_harts must be at least 1");
    if (geilen > Plic::kMaxGeilen) fail("geilen must be at most 63");
    if (num_harts * (2 + geilen) > Plic::kMaxContexts) fail("too many contexts");
    if (num_blocks > Plic::kMaxBlocks) fail("num_blocks must be at most 240");
    if (num_blocks > 0) {
        if (viirs_per_block == 0 || viirs_per_block > Plic::kMaxViirsPerBlock)
            fail("viirs_per_block must be in 1..1000");
        if (mgmt_irq_base == 0 || mgmt_irq_base + num_blocks - 1 > num_sources)
            fail("management interrupt IDs must lie within 1..num_sources");
    }
}

Viir Viir::decode(uint32_t raw) noexcept {
    Viir v;
    v.id = static_cast<uint16_t>(raw & 0x3FF);
    v.in_flight = v.id != 0 && (raw & (1u << 10));
    v.priority = static_cast<uint16_t>(raw >> 16);
    return v;
}

uint32_t Viir::encode() const noexcept {
    return (static_cast<uint32_t>(priority) << 16) | (in_flight ? 1u << 10 : 0u) | (id & 0x3FFu);
}

Plic::Plic(const PlicConfig& config) : cfg_(config) {
    cfg_.validate();
    reset();
}

void Plic::reset() {
    sources_.assign(cfg_.num_sources + 1, Source{});
    contexts_.assign(num_contexts(), Context{std::vector<uint32_t>(enable_words(), 0), 0});
    vcibir_.assign(num_virtual_contexts(), 0);
    blocks_.assign(cfg_.num_blocks, Block{std::vector<Viir>(cfg_.viirs_per_block), Ibmsr{}});
    lines_.assign(num_contexts(), false);
    update();
}

unsigned Plic::context_index(unsigned hart, ContextKind kind, unsigned vs_index) const {
    const unsigned base = hart * (2 + cfg_.geilen);
    switch (kind) {
    case ContextKind::M: return base;
    case ContextKind::S: return base + 1;
    case ContextKind::VS: return base + 1 + vs_index;
    }
    return base;
}

Plic::ContextId Plic::context_id(unsigned ctx) const {
    const unsigned per = 2 + cfg_.geilen;
    const unsigned k = ctx % per;
    ContextId id;
    id.hart = ctx / per;
    if (k == 0) {
        id.kind = ContextKind::M;
    } else if (k == 1) {
        id.kind = ContextKind::S;
    } else {
        id.kind = ContextKind::VS;
        id.vs_index = k - 1;
    }
    return id;
}

unsigned Plic::virtual_context_index(unsigned hart, unsigned vs_index) const {
    return hart * cfg_.geilen + (vs_index - 1);
}

unsigned Plic::context_of_virtual(unsigned vctx) const {
    return context_index(vctx / cfg_.geilen, ContextKind::VS, vctx % cfg_.geilen + 1);
}

std::optional<unsigned> Plic::attached_block(unsigned ctx) const {
    const ContextId id = context_id(ctx);
    if (id.kind != ContextKind::VS) return std::nullopt;
    const uint32_t b = vcibir_[virtual_context_index(id.hart, id.vs_index)];
    if (b == 0) return std::nullopt;
    return b - 1;
}

bool Plic::enabled(unsigned ctx, unsigned id) const {
    if (id == 0 || id > cfg_.num_sources) return false;
    return (contexts_.at(ctx).enable[id / 32] >> (id % 32)) & 1;
}

void Plic::set_enable(unsigned ctx, unsigned id, bool on) {
    if (id == 0 || id > cfg_.num_sources) return;
    uint32_t& w = contexts_.at(ctx).enable[id / 32];
    const uint32_t bit = 1u << (id % 32);
    w = on ? (w | bit) : (w & ~bit);
    update();
}

void Plic::set_priority(unsigned id, uint32_t priority) {
    if (id == 0 || id > cfg_.num_sources) return;
    sources_[id].priority = priority;
    update();
}

void Plic::set_threshold(unsigned ctx, uint32_t threshold) {
    contexts_.at(ctx).threshold = threshold;
    update();
}

std::optional<Plic::Candidate> Plic::best_candidate(unsigned ctx) const {
    std::optional<Candidate> best;
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        if (a.id != b.id) return a.id < b.id;
        return !a.virtual_ && b.virtual_;
    };
    const Context& c = contexts_[ctx];
    for (unsigned w = 0; w < c.enable.size(); ++w) {
        uint32_t bits = c.enable[w];
        while (bits) {
            const unsigned b = static_cast<unsigned>(__builtin_ctz(bits));
            bits &= bits - 1;
            const unsigned id = w * 32 + b;
            const Source& s = sources_[id];
            if (!s.pending || s.priority == 0) continue;
            Candidate cand{s.priority, id, false, 0};
            if (!best || better(cand, *best)) best = cand;
        }
    }
    if (auto blk = attached_block(ctx)) {
        const auto& viirs = blocks_[*blk].viirs;
        for (unsigned j = 0; j < viirs.size(); ++j) {
            const Viir& v = viirs[j];
            if (!v.pending() || v.priority == 0) continue;
            Candidate cand{v.priority, v.id, true, j};
            if (!best || better(cand, *best)) best = cand;
        }
    }
    return best;
}

uint32_t Plic::claim(unsigned ctx) {
    auto best = best_candidate(ctx);
    if (!best) return 0;
    if (best->virtual_) {
        Viir& v = blocks_[*attached_block(ctx)].viirs[best->viir];
        if (!has_mutation(cfg_.mutations, Mutation::viir_inflight)) v.in_flight = true;
    } else {
        Source& s = sources_[best->id];
        s.pending = false;
        s.claimed = true;
    }
    update();
    return best->id;
}

void Plic::complete(unsigned ctx, uint32_t id) {
    if (auto blk = attached_block(ctx)) {
        Block& block = blocks_[*blk];
        Viir* match = nullptr;
        for (Viir& v : block.viirs) {
            if (v.id != 0 && v.id == id) {
                if (v.in_flight) {
                    match = &v;
                    break;
                }
                if (!match) match = &v;
            }
        }
        if (match) {
            *match = Viir{};
        } else if (enabled(ctx, id)) {
            sources_[id].claimed = false;
            gateway_update(id);
        } else if (block.ibmsr.enable_bad_complete) {
            block.ibmsr.status_bad_complete = true;
            block.ibmsr.aux = static_cast<uint16_t>(id & 0x3FF);
        }
        update();
        return;
    }
    if (enabled(ctx, id)) {
        sources_[id].claimed = false;
        gateway_update(id);
        update();
    }
}

void Plic::set_source_level(unsigned id, bool level) {
    if (id == 0 || id > cfg_.num_sources) return;
    sources_[id].level = level;
    gateway_update(id);
    update();
}

void Plic::gateway_update(unsigned id) {
    Source& s = sources_[id];
    if (s.level && !s.claimed) s.pending = true;
}

void Plic::viir_write(unsigned block, unsigned j, uint32_t value) {
    blocks_.at(block).viirs.at(j) = Viir::decode(value);
    update();
}

uint32_t Plic::viir_read(unsigned block, unsigned j) const {
    return blocks_.at(block).viirs.at(j).encode();
}

void Plic::vcibir_write(unsigned vctx, uint32_t value) {
    // Values naming a non-existent block are ignored.
    if (value > cfg_.num_blocks) return;
    vcibir_.at(vctx) = value;
    update();
}

bool Plic::block_attached(unsigned block) const {
    for (uint32_t v : vcibir_)
        if (v == block + 1) return true;
    return false;
}

bool Plic::no_pending_condition(unsigned block) const {
    const Block& b = blocks_[block];
    if (!b.ibmsr.enable_no_pending || !block_attached(block)) return false;
    for (const Viir& v : b.viirs)
        if (v.pending()) return false;
    return true;
}

uint32_t Plic::ibmsr_read(unsigned block) const {
    const Ibmsr& r = blocks_.at(block).ibmsr;
    uint32_t v = 0;
    if (r.enable_no_pending) v |= Ibmsr::kEnableNoPending;
    if (r.enable_bad_complete) v |= Ibmsr::kEnableBadComplete;
    if (no_pending_condition(block)) v |= Ibmsr::kStatusNoPending;
    if (r.status_bad_complete) v |= Ibmsr::kStatusBadComplete;
    v |= static_cast<uint32_t>(r.aux & 0x3FF) << Ibmsr::kAuxShift;
    return v;
}

void Plic::ibmsr_write(unsigned block, uint32_t value) {
    Ibmsr& r = blocks_.at(block).ibmsr;
    r.enable_no_pending = value & Ibmsr::kEnableNoPending;
    r.enable_bad_complete = value & Ibmsr::kEnableBadComplete;
    if (value & Ibmsr::kStatusBadComplete) r.status_bad_complete = false;
    // Disabling event (ii) also drops a latched status.
    if (!r.enable_bad_complete) r.status_bad_complete = false;
    update();
}

void Plic::update() {
    for (unsigned b = 0; b < blocks_.size(); ++b) {
        const bool level = no_pending_condition(b) || blocks_[b].ibmsr.status_bad_complete;
        Source& s = sources_[mgmt_source(b)];
        s.level = level;
        gateway_update(mgmt_source(b));
    }
    for (unsigned c = 0; c < lines_.size(); ++c) {
        auto best = best_candidate(c);
        lines_[c] = best && best->priority > contexts_[c].threshold;
    }
}

std::optional<uint64_t> Plic::read(addr_t off, unsigned width) {
    if (width != 4 || off % 4 != 0) return std::nullopt;
    if (off < kPending) {
        const addr_t id = off / 4;
        if (id == 0 || id > cfg_.num_sources) return std::nullopt;
        return sources_[id].priority;
    }
    if (off < kEnable) {
        const addr_t word = (off - kPending) / 4;
        if (word >= enable_words()) return std::nullopt;
        uint32_t v = 0;
        for (unsigned b = 0; b < 32; ++b) {
            const addr_t id = word * 32 + b;
            if (id != 0 && id <= cfg_.num_sources && sources_[id].pending) v |= 1u << b;
        }
        return v;
    }
    if (off < kContext) {
        const addr_t ctx = (off - kEnable) / kEnableStride;
        const addr_t word = ((off - kEnable) % kEnableStride) / 4;
        if (ctx >= num_contexts() || word >= enable_words()) return std::nullopt;
        return contexts_[ctx].enable[word];
    }
    if (off < kVcibir) {
        const addr_t ctx = (off - kContext) / kContextStride;
        const addr_t reg = (off - kContext) % kContextStride;
        if (ctx >= num_contexts()) return std::nullopt;
        if (reg == 0) return contexts_[ctx].threshold;
        if (reg == 4) return claim(static_cast<unsigned>(ctx));
        return std::nullopt;
    }
    if (off < kViir) {
        const addr_t v = (off - kVcibir) / 4;
        if (v >= num_virtual_contexts()) return std::nullopt;
        return vcibir_[v];
    }
    if (off < kViir + kMaxBlocks * kViirBlockStride) {
        const addr_t blk = (off - kViir) / kViirBlockStride;
        const addr_t j = ((off - kViir) % kViirBlockStride) / 4;
        if (blk >= cfg_.num_blocks || j >= cfg_.viirs_per_block) return std::nullopt;
        return viir_read(static_cast<unsigned>(blk), static_cast<unsigned>(j));
    }
    if (off >= kIbmsr && off < kIbmsr + cfg_.num_blocks * 4)
        return ibmsr_read(static_cast<unsigned>((off - kIbmsr) / 4));
    return std::nullopt;
}

bool Plic::write(addr_t off, unsigned width, uint64_t value64) {
    if (width != 4 || off % 4 != 0) return false;
    const auto value = static_cast<uint32_t>(value64);
    if (off < kPending) {
        const addr_t id = off / 4;
        if (id == 0 || id > cfg_.num_sources) return false;
        set_priority(static_cast<unsigned>(id), value);
        return true;
    }
    if (off < kEnable) {
        const addr_t word = (off - kPending) / 4;
        return word < enable_words(); // read-only, writes ignored
    }
    if (off < kContext) {
        const addr_t ctx = (off - kEnable) / kEnableStride;
        const addr_t word = ((off - kEnable) % kEnableStride) / 4;
        if (ctx >= num_contexts() || word >= enable_words()) return false;
        uint32_t mask = ~0u;
        if (word == 0) mask &= ~1u;
        const uint64_t first = word * 32;
        if (first + 31 > cfg_.num_sources) {
            const uint64_t valid = cfg_.num_sources >= first ? cfg_.num_sources - first + 1 : 0;
            mask &= valid >= 32 ? ~0u : static_cast<uint32_t>((1ull << valid) - 1);
        }
        contexts_[ctx].enable[word] = value & mask;
        update();
        return true;
    }
    if (off < kVcibir) {
        const addr_t ctx = (off - kContext) / kContextStride;
        const addr_t reg = (off - kContext) % kContextStride;
        if (ctx >= num_contexts()) return false;
        if (reg == 0) {
            set_threshold(static_cast<unsigned>(ctx), value);
            return true;
        }
        if (reg == 4) {
            complete(static_cast<unsigned>(ctx), value);
            return true;
        }
        return false;
    }
    if (off < kViir) {
        const addr_t v = (off - kVcibir) / 4;
        if (v >= num_virtual_contexts()) return false;
        vcibir_write(static_cast<unsigned>(v), value);
        return true;
    }
    if (off < kViir + kMaxBlocks * kViirBlockStride) {
        const addr_t blk = (off - kViir) / kViirBlockStride;
        const addr_t j = ((off - kViir) % kViirBlockStride) / 4;
        if (blk >= cfg_.num_blocks || j >= cfg_.viirs_per_block) return false;
        viir_write(static_cast<unsigned>(blk), static_cast<unsigned>(j), value);
        return true;
    }
    if (off >= kIbmsr && off < kIbmsr + cfg_.num_blocks * 4) {
        ibmsr_write(static_cast<unsigned>((off - kIbmsr) / 4), value);
        return true;
    }
    return false;
}

} // namespace hvsim
