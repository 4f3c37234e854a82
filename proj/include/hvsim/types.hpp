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
#include <string_view>

namespace hvsim {

using addr_t = uint64_t;
using reg_t = uint64_t;

enum class Priv : uint8_t {
    U = 0,
    S = 1,
    M = 3,
};

// Privilege level plus the virtualization bit. V=1 is only legal with U or S
// (VU / VS); M always runs with V=0.
struct PrivilegeContext {
    Priv priv = Priv::M;
    bool virt = false;

    constexpr bool valid() const noexcept { return !(virt && priv == Priv::M); }

    constexpr bool is_m() const noexcept { return priv == Priv::M; }
    constexpr bool is_hs() const noexcept { return priv == Priv::S && !virt; }
    constexpr bool is_u() const noexcept { return priv == Priv::U && !virt; }
    constexpr bool is_vs() const noexcept { return priv == Priv::S && virt; }
    constexpr bool is_vu() const noexcept { return priv == Priv::U && virt; }

    friend constexpr bool operator==(PrivilegeContext, PrivilegeContext) = default;
};

inline constexpr PrivilegeContext kModeM{Priv::M, false};
inline constexpr PrivilegeContext kModeHS{Priv::S, false};
inline constexpr PrivilegeContext kModeU{Priv::U, false};
inline constexpr PrivilegeContext kModeVS{Priv::S, true};
inline constexpr PrivilegeContext kModeVU{Priv::U, true};

constexpr std::string_view mode_name(PrivilegeContext ctx) noexcept {
    if (ctx.is_m()) return "M";
    if (ctx.is_hs()) return "HS";
    if (ctx.is_u()) return "U";
    if (ctx.is_vs()) return "VS";
    if (ctx.is_vu()) return "VU";
    return "?";
}

enum class AccessKind : uint8_t { fetch, load, store };

// Runtime switches that disable individual features. Used by the
// conformance suite to show that each unit actually depends on the feature it
// claims to cover.
enum class Mutation : uint32_t {
    none = 0,
    hlvx_exec = 1u << 0,           // hlvx checks R instead of X
    vs_shadow = 1u << 1,           // V=1 supervisor CSR accesses hit the HS copy
    gpa_report = 1u << 2,          // htval/mtval2 never written
    hfence_flush = 1u << 3,        // hfence.* does not invalidate guest entries
    tlb_recheck = 1u << 4,         // TLB hits skip permission re-checks
    vgein_select = 1u << 5,        // hstatus.VGEIN ignored
    hcounteren_tm = 1u << 6,       // hcounteren.TM not enforced
    ecall_vs_cause = 1u << 7,      // VS ecall reported as S ecall
    stage2_user = 1u << 8,         // G-stage leaves accepted with U=0
    virtual_instruction = 1u << 9, // virtual-instruction traps become illegal
    viir_inflight = 1u << 10,      // claim leaves VIIR pending
    htinst_zero = 1u << 11,        // htinst/mtinst become plain storage
    clint_vstimer = 1u << 12,      // vstimecmp does not drive VSTIP
};

using MutationSet = uint32_t;

constexpr bool has_mutation(MutationSet set, Mutation m) noexcept {
    return (set & static_cast<uint32_t>(m)) != 0;
}

} // namespace hvsim
