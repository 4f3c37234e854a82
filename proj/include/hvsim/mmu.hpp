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

#include <optional>
#include <vector>

#include "hvsim/trap.hpp"
#include "hvsim/types.hpp"

namespace hvsim {

struct CsrFile;

namespace pte {
inline constexpr uint8_t V = 1u << 0;
inline constexpr uint8_t R = 1u << 1;
inline constexpr uint8_t W = 1u << 2;
inline constexpr uint8_t X = 1u << 3;
inline constexpr uint8_t U = 1u << 4;
inline constexpr uint8_t G = 1u << 5;
inline constexpr uint8_t A = 1u << 6;
inline constexpr uint8_t D = 1u << 7;
inline constexpr unsigned PPN_SHIFT = 10;
inline constexpr uint64_t PPN_MASK = (1ull << 44) - 1;
inline constexpr uint64_t RESERVED_MASK = ~((1ull << 54) - 1);
} // namespace pte

struct Pte {
    uint64_t raw = 0;

    constexpr bool valid() const noexcept { return raw & pte::V; }
    constexpr bool readable() const noexcept { return raw & pte::R; }
    constexpr bool writable() const noexcept { return raw & pte::W; }
    constexpr bool executable() const noexcept { return raw & pte::X; }
    constexpr bool user() const noexcept { return raw & pte::U; }
    constexpr bool accessed() const noexcept { return raw & pte::A; }
    constexpr bool dirty() const noexcept { return raw & pte::D; }
    constexpr bool leaf() const noexcept { return valid() && (readable() || executable()); }
    constexpr uint8_t flags() const noexcept { return static_cast<uint8_t>(raw & 0xFF); }
    constexpr uint64_t ppn() const noexcept { return (raw >> pte::PPN_SHIFT) & pte::PPN_MASK; }

    static constexpr Pte make(uint64_t ppn, uint8_t flags) noexcept {
        return Pte{(ppn << pte::PPN_SHIFT) | flags};
    }
};

// Read-only view of physical memory used by page-table walks.
class PhysicalMemory {
public:
    virtual ~PhysicalMemory() = default;
    // 8-byte aligned read from RAM; nullopt when pa is not backed by RAM.
    virtual std::optional<uint64_t> read_pte(addr_t pa) const = 0;
};

struct AccessRequest {
    addr_t va = 0;
    AccessKind kind = AccessKind::load;
    Priv priv = Priv::S; // effective privilege after MPRV / SPVP
    bool virt = false;   // effective V
    bool hlvx = false;
    bool sum = false; // SUM of the first stage in effect
    bool mxr = false; // MXR of the first stage in effect
};

// Permission set of one translation stage. A bare stage allows everything.
struct StagePerms {
    uint8_t flags = 0;
    bool bare = false;

    friend bool operator==(const StagePerms&, const StagePerms&) = default;
};

struct TlbEntry {
    uint64_t vpn = 0;      // va >> 12, aligned to level
    unsigned level = 0;    // 0: 4 KiB, 1: 2 MiB, 2: 1 GiB
    uint64_t host_ppn = 0; // aligned to level
    uint64_t gpa_ppn = 0;  // aligned to level; meaningful when guest
    StagePerms stage1;
    StagePerms stage2;
    bool guest = false;

    constexpr uint64_t page_mask() const noexcept { return (1ull << (12 + 9 * level)) - 1; }
    constexpr bool matches(addr_t va, bool virt) const noexcept {
        return guest == virt && ((va >> 12) & ~((1ull << (9 * level)) - 1)) == vpn;
    }

    friend bool operator==(const TlbEntry&, const TlbEntry&) = default;
};

struct Translation {
    addr_t pa = 0;
    std::optional<TlbEntry> entry; // empty when no translation was in effect
};

struct GStageResult {
    addr_t pa = 0;
    unsigned level = 2;
    StagePerms perms;
};

// Largest guest-physical address accepted by Sv39x4.
inline constexpr unsigned kGpaBits = 41;

// Second-stage (Sv39x4) walk of one guest-physical address. On failure the
// returned TrapInfo carries the GPA; tval is left to the caller.
Result<GStageResult> gstage_walk(addr_t gpa, AccessKind kind, const CsrFile& csrs,
                                 const PhysicalMemory& memory, bool hlvx = false);

// Full one- or two-stage translation, without TLB.
Result<Translation> translate(const AccessRequest& req, const CsrFile& csrs,
                              const PhysicalMemory& memory);

// Whether translation is active for this request at all.
bool translation_active(const AccessRequest& req, const CsrFile& csrs);

enum class FenceKind : uint8_t { sfence_vma, hfence_vvma, hfence_gvma };

class Tlb {
public:
    explicit Tlb(size_t capacity = 32) : capacity_(capacity) {}

    size_t capacity() const noexcept { return capacity_; }
    size_t size() const noexcept { return entries_.size(); }
    const std::vector<TlbEntry>& entries() const noexcept { return entries_; }
    uint64_t walks() const noexcept { return walks_; }
    uint64_t hits() const noexcept { return hits_; }

    const TlbEntry* find(addr_t va, bool virt) const noexcept;
    void insert(const TlbEntry& entry);
    void flush_guest(bool guest);
    void clear() noexcept { entries_.clear(); next_ = 0; }

    void count_walk() noexcept { ++walks_; }
    void count_hit() noexcept { ++hits_; }

private:
    size_t capacity_;
    std::vector<TlbEntry> entries_;
    size_t next_ = 0;
    uint64_t walks_ = 0;
    uint64_t hits_ = 0;
};

// Translate through the TLB: hits re-check both cached stages against the
// request; misses walk and fill.
Result<Translation> tlb_lookup_or_fill(const AccessRequest& req, const CsrFile& csrs,
                                       const PhysicalMemory& memory, Tlb& tlb);

void fence(FenceKind kind, Tlb& tlb, MutationSet mutations = 0);

} // namespace hvsim
