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

#include "hvsim/trap_engine.hpp"

#include <string>

namespace hvsim {

namespace {

constexpr reg_t kNeverToVs =
    (1ull << static_cast<unsigned>(Exception::EcallFromS)) |
    (1ull << static_cast<unsigned>(Exception::EcallFromVS)) |
    (1ull << static_cast<unsigned>(Exception::EcallFromM)) |
    (1ull << static_cast<unsigned>(Exception::InstructionGuestPageFault)) |
    (1ull << static_cast<unsigned>(Exception::LoadGuestPageFault)) |
    (1ull << static_cast<unsigned>(Exception::VirtualInstruction)) |
    (1ull << static_cast<unsigned>(Exception::StoreAmoGuestPageFault));

reg_t set_bit(reg_t v, reg_t mask, bool on) { return on ? (v | mask) : (v & ~mask); }

// VS-level interrupts appear to the guest under the supervisor codes.
uint8_t guest_visible_code(TrapCause cause) {
    if (!cause.is_interrupt) return cause.code;
    switch (static_cast<Interrupt>(cause.code)) {
    case Interrupt::VirtualSupervisorSoftware: return static_cast<uint8_t>(Interrupt::SupervisorSoftware);
    case Interrupt::VirtualSupervisorTimer: return static_cast<uint8_t>(Interrupt::SupervisorTimer);
    case Interrupt::VirtualSupervisorExternal: return static_cast<uint8_t>(Interrupt::SupervisorExternal);
    default: return cause.code;
    }
}

std::optional<TrapCause> highest(reg_t set) {
    for (Interrupt i : kInterruptPriority)
        if (set & irq::bit(i)) return TrapCause::interrupt(i);
    return std::nullopt;
}

} // namespace

std::string cause_name(TrapCause cause) {
    if (cause.is_interrupt) {
        switch (static_cast<Interrupt>(cause.code)) {
        case Interrupt::SupervisorSoftware: return "SupervisorSoftware";
        case Interrupt::VirtualSupervisorSoftware: return "VirtualSupervisorSoftware";
        case Interrupt::MachineSoftware: return "MachineSoftware";
        case Interrupt::SupervisorTimer: return "SupervisorTimer";
        case Interrupt::VirtualSupervisorTimer: return "VirtualSupervisorTimer";
        case Interrupt::MachineTimer: return "MachineTimer";
        case Interrupt::SupervisorExternal: return "SupervisorExternal";
        case Interrupt::VirtualSupervisorExternal: return "VirtualSupervisorExternal";
        case Interrupt::MachineExternal: return "MachineExternal";
        case Interrupt::SupervisorGuestExternal: return "SupervisorGuestExternal";
        }
        return "Interrupt" + std::to_string(cause.code);
    }
    switch (static_cast<Exception>(cause.code)) {
    case Exception::InstructionAddressMisaligned: return "InstructionAddressMisaligned";
    case Exception::InstructionAccessFault: return "InstructionAccessFault";
    case Exception::IllegalInstruction: return "IllegalInstruction";
    case Exception::Breakpoint: return "Breakpoint";
    case Exception::LoadAddressMisaligned: return "LoadAddressMisaligned";
    case Exception::LoadAccessFault: return "LoadAccessFault";
    case Exception::StoreAmoAddressMisaligned: return "StoreAmoAddressMisaligned";
    case Exception::StoreAmoAccessFault: return "StoreAmoAccessFault";
    case Exception::EcallFromU: return "EcallFromU";
    case Exception::EcallFromS: return "EcallFromS";
    case Exception::EcallFromVS: return "EcallFromVS";
    case Exception::EcallFromM: return "EcallFromM";
    case Exception::InstructionPageFault: return "InstructionPageFault";
    case Exception::LoadPageFault: return "LoadPageFault";
    case Exception::StoreAmoPageFault: return "StoreAmoPageFault";
    case Exception::InstructionGuestPageFault: return "InstructionGuestPageFault";
    case Exception::LoadGuestPageFault: return "LoadGuestPageFault";
    case Exception::VirtualInstruction: return "VirtualInstruction";
    case Exception::StoreAmoGuestPageFault: return "StoreAmoGuestPageFault";
    }
    return "Exception" + std::to_string(cause.code);
}

TrapTarget resolve_target(TrapCause cause, PrivilegeContext ctx, const CsrFile& csrs) {
    if (ctx.is_m()) return TrapTarget::M;
    const reg_t bit = 1ull << cause.code;
    if (cause.is_interrupt) {
        if (!(csrs.mideleg() & bit)) return TrapTarget::M;
        if (ctx.virt && (csrs.hideleg & irq::VS_BITS & bit)) return TrapTarget::VS;
        return TrapTarget::HS;
    }
    if (!(csrs.medeleg & bit)) return TrapTarget::M;
    if (ctx.virt && (csrs.hedeleg & ~kNeverToVs & bit)) return TrapTarget::VS;
    return TrapTarget::HS;
}

void take_trap(HartState& hart, const TrapInfo& info, TrapTarget target) {
    CsrFile& c = hart.csrs;
    const PrivilegeContext old = hart.ctx;
    const bool report_gpa = !has_mutation(c.mutations, Mutation::gpa_report);
    const reg_t gpa_field = info.gpa ? (*info.gpa >> 2) : 0;

    switch (target) {
    case TrapTarget::M: {
        c.mepc = info.pc & ~reg_t{3};
        c.mcause = info.cause.encoded();
        c.mtval = info.tval;
        if (report_gpa) c.mtval2 = gpa_field;
        c.mtinst = 0;
        reg_t s = c.mstatus;
        s = set_bit(s, status::MPV, old.virt);
        s = set_bit(s, status::GVA, info.gva);
        s = (s & ~status::MPP) | (static_cast<reg_t>(old.priv) << status::MPP_SHIFT);
        s = set_bit(s, status::MPIE, s & status::MIE);
        s &= ~status::MIE;
        c.mstatus = s;
        hart.ctx = kModeM;
        hart.pc = c.mtvec;
        ++hart.stats.traps_to_m;
        break;
    }
    case TrapTarget::HS: {
        c.sepc = info.pc & ~reg_t{3};
        c.scause = info.cause.encoded();
        c.stval = info.tval;
        if (report_gpa) c.htval = gpa_field;
        c.htinst = 0;
        reg_t h = c.hstatus;
        h = set_bit(h, hstatus_bits::SPV, old.virt);
        if (old.virt) h = set_bit(h, hstatus_bits::SPVP, old.priv == Priv::S);
        h = set_bit(h, hstatus_bits::GVA, info.gva);
        c.hstatus = h;
        reg_t s = c.mstatus;
        s = set_bit(s, status::SPP, old.priv != Priv::U);
        s = set_bit(s, status::SPIE, s & status::SIE);
        s &= ~status::SIE;
        c.mstatus = s;
        hart.ctx = kModeHS;
        hart.pc = c.stvec;
        ++hart.stats.traps_to_hs;
        break;
    }
    case TrapTarget::VS: {
        c.vsepc = info.pc & ~reg_t{3};
        c.vscause = (static_cast<reg_t>(info.cause.is_interrupt) << 63) | guest_visible_code(info.cause);
        c.vstval = info.tval;
        reg_t s = c.vsstatus;
        s = set_bit(s, status::SPP, old.priv != Priv::U);
        s = set_bit(s, status::SPIE, s & status::SIE);
        s &= ~status::SIE;
        c.vsstatus = s;
        hart.ctx = kModeVS;
        hart.pc = c.vstvec;
        ++hart.stats.traps_to_vs;
        break;
    }
    }
    hart.waiting = false;
}

MaybeTrap execute_xret(HartState& hart, XretKind which) {
    CsrFile& c = hart.csrs;
    const PrivilegeContext ctx = hart.ctx;
    const bool vi_as_illegal = has_mutation(c.mutations, Mutation::virtual_instruction);
    const TrapInfo vi = TrapInfo::of(vi_as_illegal ? Exception::IllegalInstruction
                                                   : Exception::VirtualInstruction);

    if (which == XretKind::mret) {
        if (!ctx.is_m()) return TrapInfo::of(Exception::IllegalInstruction);
        reg_t s = c.mstatus;
        const auto mpp = static_cast<Priv>((s & status::MPP) >> status::MPP_SHIFT);
        const bool mpv = (s & status::MPV) && mpp != Priv::M;
        s = set_bit(s, status::MIE, s & status::MPIE);
        s |= status::MPIE;
        s &= ~status::MPP; // U
        s &= ~status::MPV;
        if (mpp != Priv::M) s &= ~status::MPRV;
        c.mstatus = s;
        hart.ctx = PrivilegeContext{mpp, mpv};
        hart.pc = c.mepc;
        return std::nullopt;
    }

    if (ctx.virt) {
        if (ctx.priv == Priv::U) return vi;
        if (c.hstatus & hstatus_bits::VTSR) return vi;
        reg_t s = c.vsstatus;
        const Priv spp = (s & status::SPP) ? Priv::S : Priv::U;
        s = set_bit(s, status::SIE, s & status::SPIE);
        s |= status::SPIE;
        s &= ~status::SPP;
        c.vsstatus = s;
        hart.ctx = PrivilegeContext{spp, true};
        hart.pc = c.vsepc;
        return std::nullopt;
    }

    if (ctx.priv == Priv::U) return TrapInfo::of(Exception::IllegalInstruction);
    if (ctx.is_hs() && (c.mstatus & status::TSR)) return TrapInfo::of(Exception::IllegalInstruction);
    reg_t s = c.mstatus;
    const Priv spp = (s & status::SPP) ? Priv::S : Priv::U;
    const bool spv = c.hstatus & hstatus_bits::SPV;
    s = set_bit(s, status::SIE, s & status::SPIE);
    s |= status::SPIE;
    s &= ~status::SPP;
    s &= ~status::MPRV;
    c.mstatus = s;
    hart.ctx = PrivilegeContext{spp, spv};
    hart.pc = c.sepc;
    return std::nullopt;
}

std::optional<TrapCause> pick_interrupt(const HartState& hart) {
    const CsrFile& c = hart.csrs;
    const reg_t pending = c.mip() & c.mie;
    if (!pending) return std::nullopt;
    const PrivilegeContext ctx = hart.ctx;

    const bool m_enabled = !ctx.is_m() || (c.mstatus & status::MIE);
    const bool hs_enabled =
        !ctx.is_m() && (ctx.virt || ctx.priv == Priv::U || (c.mstatus & status::SIE));
    const bool vs_enabled = ctx.virt && (ctx.priv == Priv::U || (c.vsstatus & status::SIE));

    const reg_t mideleg = c.mideleg();
    const reg_t to_vs = mideleg & c.hideleg & irq::VS_BITS;
    const reg_t m_set = pending & ~mideleg;
    const reg_t hs_set = pending & mideleg & ~to_vs;
    const reg_t vs_set = pending & to_vs;

    if (m_enabled && m_set) return highest(m_set);
    if (hs_enabled && hs_set) return highest(hs_set);
    if (vs_enabled && vs_set) return highest(vs_set);
    return std::nullopt;
}

bool wake_condition(const HartState& hart) {
    return (hart.csrs.mip() & hart.csrs.mie) != 0;
}

} // namespace hvsim
