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

// Reference models written from the architecture rules, independent of the
// simulator sources. Tests compare simulator behaviour against these.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hvsim/mmu.hpp"

namespace oracle {

using u64 = uint64_t;

// ---------------------------------------------------------------- memory

// Sparse 8-byte word store standing in for RAM.
class SparseRam : public hvsim::PhysicalMemory {
public:
    SparseRam(u64 base, u64 size) : base_(base), size_(size) {}
    std::optional<u64> read_pte(u64 pa) const override;
    std::optional<u64> peek(u64 pa) const { return read_pte(pa); }
    void poke(u64 pa, u64 v) { words_[pa] = v; }
    bool backed(u64 pa) const { return pa >= base_ && pa < base_ + size_ && pa % 8 == 0; }
    u64 base() const { return base_; }
    u64 size() const { return size_; }

private:
    u64 base_;
    u64 size_;
    std::unordered_map<u64, u64> words_;
};

// ---------------------------------------------------------------- translation

enum class Kind { fetch, load, store };

enum class Outcome {
    ok,
    page_fault,        // 12 / 13 / 15 by kind
    guest_page_fault,  // 20 / 21 / 23 by kind
    access_fault,      // 1 / 5 / 7 by kind
};

struct WalkQuery {
    u64 va = 0;
    Kind kind = Kind::load;
    bool user = false; // VU (true) or VS (false) when virt; U or S otherwise
    bool virt = true;
    bool hlvx = false;
    bool sum = false;     // SUM of the first stage (vsstatus when virt)
    bool mxr = false;     // MXR of the first stage (vsstatus when virt)
    bool mxr_m = false;   // mstatus.MXR, applies to the G-stage
    u64 satp = 0;         // vsatp when virt
    u64 hgatp = 0;
};

struct WalkAnswer {
    Outcome outcome = Outcome::ok;
    u64 pa = 0;
    std::optional<u64> gpa; // guest page faults only
    bool operator==(const WalkAnswer&) const = default;
    std::string str() const;
};

// Sv39 / Sv39x4 two-stage walk as specified, with no caching.
WalkAnswer translate(const WalkQuery& q, const SparseRam& mem);

// Exception code the simulator should raise for an outcome and access kind.
unsigned cause_code(Outcome o, Kind k);

// ---------------------------------------------------------------- delegation

enum class Level { M, HS, VS };

struct Origin {
    unsigned priv; // 0 U, 1 S, 3 M
    bool virt;
};

// Truth table for synchronous exceptions (raw CSR values, no WARL applied).
Level exception_target(unsigned cause, u64 medeleg, u64 hedeleg, Origin origin);
// Same for interrupts. mideleg is the effective (read) value.
Level interrupt_target(unsigned code, u64 mideleg, u64 hideleg, Origin origin);

// Exception codes that can never be handled in VS.
bool never_to_vs(unsigned cause);

// ---------------------------------------------------------------- interrupt controller

struct Candidate {
    unsigned id = 0;
    unsigned priority = 0;
    bool is_virtual = false; // VIIR as opposed to a wired source
};

// Highest priority wins; ties go to the lower ID, then to the wired source.
// Priority 0 never wins. Returns 0 when nothing is eligible.
unsigned pick_claim(const std::vector<Candidate>& cands);

// ---------------------------------------------------------------- random page tables

// Builds random two-stage page tables in a SparseRam and generates queries.
class TableGen {
public:
    TableGen(SparseRam& mem, u64 pool_base, u64 pool_size, uint32_t seed);

    // Random table set; returns (vsatp, hgatp) with random Bare choices.
    std::pair<u64, u64> build();
    WalkQuery query(u64 vsatp, u64 hgatp);

    // Allocates a zeroed, size-aligned table from the pool.
    u64 alloc(u64 bytes);

private:
    u64 random_flags(bool leaf, bool gstage);
    u64 random_gpa_target(unsigned level);
    u64 random_pa_target(unsigned level);
    void fill_gstage(u64 root);
    void fill_stage1(u64 root);

    SparseRam& mem_;
    u64 pool_base_;
    u64 pool_end_;
    u64 next_;
    std::mt19937_64 rng_;
    std::vector<u64> gstage_leaves_;  // GPAs reachable through the G-stage
    std::vector<u64> stage1_vas_;     // VAs with stage-1 mappings
    u64 g_root_ = 0;
};

} // namespace oracle
