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

#include "hvsim/mmu.hpp"

#include <algorithm>

#include "hvsim/csr.hpp"

namespace hvsim {

namespace {

constexpr uint64_t level_mask(unsigned level) noexcept {
    return (1ull << (12 + 9 * level)) - 1;
}

bool kind_allows(uint8_t flags, AccessKind kind, bool hlvx, bool mxr) {
    switch (kind) {
    case AccessKind::fetch: return flags & pte::X;
    case AccessKind::store: return flags & pte::W;
    case AccessKind::load:
        if (hlvx) return flags & pte::X;
        return (flags & pte::R) || (mxr && (flags & pte::X));
    }
    return false;
}

bool ad_allows(uint8_t flags, AccessKind kind) {
    if (!(flags & pte::A)) return false;
    return kind != AccessKind::store || (flags & pte::D);
}

bool stage1_allows(uint8_t flags, const AccessRequest& req, MutationSet mutations) {
    const bool user_page = flags & pte::U;
    if (req.priv == Priv::U) {
        if (!user_page) return false;
    } else if (user_page) {
        // S never executes user pages; loads/stores need SUM.
        if (req.kind == AccessKind::fetch || !req.sum) return false;
    }
    const bool hlvx = req.hlvx && !has_mutation(mutations, Mutation::hlvx_exec);
    return kind_allows(flags, req.kind, hlvx, req.mxr) && ad_allows(flags, req.kind);
}

bool stage2_allows(uint8_t flags, AccessKind kind, bool hlvx, const CsrFile& csrs) {
    if (!(flags & pte::U) && !has_mutation(csrs.mutations, Mutation::stage2_user)) return false;
    const bool mxr = csrs.mstatus & status::MXR;
    hlvx = hlvx && !has_mutation(csrs.mutations, Mutation::hlvx_exec);
    return kind_allows(flags, kind, hlvx, mxr) && ad_allows(flags, kind);
}

bool malformed(const Pte& p) {
    return !p.valid() || (!p.readable() && p.writable()) || (p.raw & pte::RESERVED_MASK);
}

bool misaligned_superpage(const Pte& p, unsigned level) {
    return level > 0 && (p.ppn() & ((1ull << (9 * level)) - 1)) != 0;
}

bool canonical_sv39(addr_t va) {
    const int64_t s = static_cast<int64_t>(va << 25) >> 25;
    return static_cast<addr_t>(s) == va;
}

TrapInfo fault(Exception e, addr_t va, bool gva) {
    TrapInfo t = TrapInfo::of(e, va);
    t.gva = gva;
    return t;
}

struct Stage1Leaf {
    addr_t out = 0; // GPA (virt) or PA
    unsigned level = 0;
    uint8_t flags = 0;
};

// Sv39 first-stage walk. For guest walks every table address is a GPA and is
// sent through the G-stage before the read.
Result<Stage1Leaf> walk_stage1(const AccessRequest& req, reg_t atp_value, const CsrFile& csrs,
                               const PhysicalMemory& memory) {
    const addr_t va = req.va;
    const bool guest = req.virt;
    if (!canonical_sv39(va)) return fault(page_fault_for(req.kind), va, guest);

    addr_t table = atp::ppn(atp_value) << 12;
    for (int level = 2; level >= 0; --level) {
        const addr_t entry_addr = table + ((va >> (12 + 9 * level)) & 0x1FF) * 8;
        addr_t entry_pa = entry_addr;
        if (guest) {
            auto g = gstage_walk(entry_addr, AccessKind::load, csrs, memory);
            if (!g) {
                TrapInfo t = g.trap();
                if (t.cause.is_guest_page_fault())
                    t.cause = TrapCause::exception(guest_page_fault_for(req.kind));
                else
                    t.cause = TrapCause::exception(access_fault_for(req.kind));
                t.tval = va;
                t.gva = true;
                return t;
            }
            entry_pa = g->pa;
        }
        auto raw = memory.read_pte(entry_pa);
        if (!raw) return fault(access_fault_for(req.kind), va, guest);
        const Pte p{*raw};
        if (malformed(p)) return fault(page_fault_for(req.kind), va, guest);
        if (!p.leaf()) {
            if (level == 0) return fault(page_fault_for(req.kind), va, guest);
            table = p.ppn() << 12;
            continue;
        }
        const auto lvl = static_cast<unsigned>(level);
        if (misaligned_superpage(p, lvl)) return fault(page_fault_for(req.kind), va, guest);
        if (!stage1_allows(p.flags(), req, csrs.mutations))
            return fault(page_fault_for(req.kind), va, guest);
        return Stage1Leaf{(p.ppn() << 12) | (va & level_mask(lvl)), lvl, p.flags()};
    }
    return fault(page_fault_for(req.kind), va, guest);
}

TlbEntry make_entry(addr_t va, addr_t gpa, addr_t pa, unsigned level, StagePerms s1,
                    StagePerms s2, bool guest) {
    TlbEntry e;
    e.level = level;
    const uint64_t low = (1ull << (9 * level)) - 1;
    e.vpn = (va >> 12) & ~low;
    e.gpa_ppn = (gpa >> 12) & ~low;
    e.host_ppn = (pa >> 12) & ~low;
    e.stage1 = s1;
    e.stage2 = s2;
    e.guest = guest;
    return e;
}

} // namespace

Result<GStageResult> gstage_walk(addr_t gpa, AccessKind kind, const CsrFile& csrs,
                                 const PhysicalMemory& memory, bool hlvx) {
    if (atp::mode(csrs.hgatp) == atp::MODE_BARE) return GStageResult{gpa, 2, {0xFF, true}};

    auto guest_fault = [&] {
        TrapInfo t = TrapInfo::of(guest_page_fault_for(kind), gpa);
        t.gpa = gpa;
        return t;
    };
    if (gpa >> kGpaBits) return guest_fault();

    addr_t table = atp::ppn(csrs.hgatp) << 12;
    for (int level = 2; level >= 0; --level) {
        // The root level consumes gpa[40:30], an 11-bit index into a 16 KiB table.
        const uint64_t index_mask = level == 2 ? 0x7FF : 0x1FF;
        const addr_t entry_addr = table + ((gpa >> (12 + 9 * level)) & index_mask) * 8;
        auto raw = memory.read_pte(entry_addr);
        if (!raw) return TrapInfo::of(access_fault_for(kind), gpa);
        const Pte p{*raw};
        if (malformed(p)) return guest_fault();
        if (!p.leaf()) {
            if (level == 0) return guest_fault();
            table = p.ppn() << 12;
            continue;
        }
        const auto lvl = static_cast<unsigned>(level);
        if (misaligned_superpage(p, lvl)) return guest_fault();
        if (!stage2_allows(p.flags(), kind, hlvx, csrs)) return guest_fault();
        return GStageResult{(p.ppn() << 12) | (gpa & level_mask(lvl)), lvl, {p.flags(), false}};
    }
    return guest_fault();
}

bool translation_active(const AccessRequest& req, const CsrFile& csrs) {
    if (!req.virt) return req.priv != Priv::M && atp::mode(csrs.satp) == atp::MODE_SV39;
    return atp::mode(csrs.vsatp) != atp::MODE_BARE || atp::mode(csrs.hgatp) != atp::MODE_BARE;
}

Result<Translation> translate(const AccessRequest& req, const CsrFile& csrs,
                              const PhysicalMemory& memory) {
    if (!translation_active(req, csrs)) return Translation{req.va, std::nullopt};

    if (!req.virt) {
        auto leaf = walk_stage1(req, csrs.satp, csrs, memory);
        if (!leaf) return leaf.trap();
        StagePerms s1{leaf->flags, false};
        return Translation{leaf->out, make_entry(req.va, leaf->out, leaf->out, leaf->level, s1,
                                                 StagePerms{0xFF, true}, false)};
    }

    addr_t gpa = req.va;
    unsigned level1 = 2;
    StagePerms s1{0xFF, true};
    if (atp::mode(csrs.vsatp) != atp::MODE_BARE) {
        auto leaf = walk_stage1(req, csrs.vsatp, csrs, memory);
        if (!leaf) return leaf.trap();
        gpa = leaf->out;
        level1 = leaf->level;
        s1 = {leaf->flags, false};
    }

    auto g = gstage_walk(gpa, req.kind, csrs, memory, req.hlvx);
    if (!g) {
        TrapInfo t = g.trap();
        t.tval = req.va;
        t.gva = true;
        return t;
    }
    const unsigned level = std::min(level1, g->level);
    return Translation{g->pa, make_entry(req.va, gpa, g->pa, level, s1, g->perms, true)};
}

const TlbEntry* Tlb::find(addr_t va, bool virt) const noexcept {
    for (const auto& e : entries_)
        if (e.matches(va, virt)) return &e;
    return nullptr;
}

void Tlb::insert(const TlbEntry& entry) {
    if (capacity_ == 0) return;
    std::erase_if(entries_, [&](const TlbEntry& e) {
        if (e.guest != entry.guest) return false;
        const unsigned level = std::max(e.level, entry.level);
        const uint64_t low = (1ull << (9 * level)) - 1;
        return (e.vpn & ~low) == (entry.vpn & ~low);
    });
    if (entries_.size() < capacity_) {
        entries_.push_back(entry);
        return;
    }
    next_ %= entries_.size();
    entries_[next_] = entry;
    next_ = (next_ + 1) % capacity_;
}

void Tlb::flush_guest(bool guest) {
    std::erase_if(entries_, [&](const TlbEntry& e) { return e.guest == guest; });
    if (entries_.empty()) next_ = 0;
}

Result<Translation> tlb_lookup_or_fill(const AccessRequest& req, const CsrFile& csrs,
                                       const PhysicalMemory& memory, Tlb& tlb) {
    if (!translation_active(req, csrs)) return Translation{req.va, std::nullopt};

    if (const TlbEntry* e = tlb.find(req.va, req.virt)) {
        tlb.count_hit();
        const addr_t offset = req.va & e->page_mask();
        if (!has_mutation(csrs.mutations, Mutation::tlb_recheck)) {
            if (!e->stage1.bare && !stage1_allows(e->stage1.flags, req, csrs.mutations))
                return fault(page_fault_for(req.kind), req.va, req.virt);
            if (!e->stage2.bare && !stage2_allows(e->stage2.flags, req.kind, req.hlvx, csrs)) {
                TrapInfo t = fault(guest_page_fault_for(req.kind), req.va, true);
                t.gpa = (e->gpa_ppn << 12) | offset;
                return t;
            }
        }
        return Translation{(e->host_ppn << 12) | offset, *e};
    }

    tlb.count_walk();
    auto r = translate(req, csrs, memory);
    if (r && r->entry) tlb.insert(*r->entry);
    return r;
}

void fence(FenceKind kind, Tlb& tlb, MutationSet mutations) {
    switch (kind) {
    case FenceKind::sfence_vma: tlb.flush_guest(false); break;
    case FenceKind::hfence_vvma:
    case FenceKind::hfence_gvma:
        if (!has_mutation(mutations, Mutation::hfence_flush)) tlb.flush_guest(true);
        break;
    }
}

} // namespace hvsim
