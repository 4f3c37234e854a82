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
#include <string_view>

#include "hvsim/csr.hpp"
#include "hvsim/hart.hpp"
#include "hvsim/trap.hpp"

namespace hvsim {

enum class TrapTarget : uint8_t { M, HS, VS };

constexpr std::string_view target_name(TrapTarget t) noexcept {
    switch (t) {
    case TrapTarget::M: return "M";
    case TrapTarget::HS: return "HS";
    case TrapTarget::VS: return "VS";
    }
    return "?";
}

constexpr PrivilegeContext target_context(TrapTarget t) noexcept {
    switch (t) {
    case TrapTarget::M: return kModeM;
    case TrapTarget::HS: return kModeHS;
    case TrapTarget::VS: return kModeVS;
    }
    return kModeM;
}

// Two-level delegation: medeleg/mideleg select HS over M; for traps taken
// with V=1, hedeleg/hideleg then select VS over HS.
TrapTarget resolve_target(TrapCause cause, PrivilegeContext ctx, const CsrFile& csrs);

// Trap entry: writes the target level's epc/cause/tval (plus htval/mtval2 for
// guest page faults), stacks interrupt enables and switches privilege.
void take_trap(HartState& hart, const TrapInfo& info, TrapTarget target);

enum class XretKind : uint8_t { sret, mret };

MaybeTrap execute_xret(HartState& hart, XretKind which);

// Fixed priority among interrupts targeting the same level.
inline constexpr std::array<Interrupt, 10> kInterruptPriority{
    Interrupt::MachineExternal,
    Interrupt::MachineSoftware,
    Interrupt::MachineTimer,
    Interrupt::SupervisorExternal,
    Interrupt::SupervisorSoftware,
    Interrupt::SupervisorTimer,
    Interrupt::SupervisorGuestExternal,
    Interrupt::VirtualSupervisorExternal,
    Interrupt::VirtualSupervisorSoftware,
    Interrupt::VirtualSupervisorTimer,
};

std::optional<TrapCause> pick_interrupt(const HartState& hart);

// Any interrupt pending and enabled in mie, ignoring delegation and global
// enables. Releases a hart from wfi.
bool wake_condition(const HartState& hart);

} // namespace hvsim
