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

#include <array>
#include <optional>

#include "hvsim/csr.hpp"
#include "hvsim/mmu.hpp"
#include "hvsim/types.hpp"

namespace hvsim {

class RegisterFile {
public:
    reg_t read(unsigned idx) const noexcept { return idx ? gprs_[idx] : 0; }

    void write(unsigned idx, reg_t value) noexcept {
        if (idx != 0) [[likely]]
            gprs_[idx] = value;
    }

    reg_t operator[](unsigned idx) const noexcept { return read(idx); }

    friend bool operator==(const RegisterFile&, const RegisterFile&) = default;

private:
    std::array<reg_t, 32> gprs_{};
};

// Index into per-mode counters.
enum class ModeIndex : uint8_t { M, HS, U, VS, VU };
inline constexpr size_t kModeCount = 5;

constexpr ModeIndex mode_index(PrivilegeContext ctx) noexcept {
    if (ctx.is_m()) return ModeIndex::M;
    if (ctx.is_hs()) return ModeIndex::HS;
    if (ctx.is_u()) return ModeIndex::U;
    if (ctx.is_vs()) return ModeIndex::VS;
    return ModeIndex::VU;
}

struct HartStats {
    std::array<uint64_t, kModeCount> retired{};
    // Trap entries by target level: M, HS, VS.
    uint64_t traps_to_m = 0;
    uint64_t traps_to_hs = 0;
    uint64_t traps_to_vs = 0;

    uint64_t retired_in(PrivilegeContext ctx) const noexcept {
        return retired[static_cast<size_t>(mode_index(ctx))];
    }
};

struct HartState {
    explicit HartState(unsigned id = 0, unsigned geilen = 0, size_t tlb_capacity = 32,
                       MutationSet mutations = 0)
        : hart_id(id), tlb(tlb_capacity) {
        csrs.geilen = geilen;
        csrs.mutations = mutations;
    }

    unsigned hart_id;
    addr_t pc = 0;
    RegisterFile x;
    PrivilegeContext ctx = kModeM;
    CsrFile csrs;
    uint64_t instret = 0;
    bool waiting = false;
    std::optional<addr_t> reservation;
    Tlb tlb;
    HartStats stats;

    MutationSet mutations() const noexcept { return csrs.mutations; }
};

} // namespace hvsim
