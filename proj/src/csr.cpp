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

#include "hvsim/csr.hpp"

#include <array>
#include <utility>

#include "hvsim/clint.hpp"
#include "hvsim/hart.hpp"

namespace hvsim {

namespace csr {

namespace {

struct Entry {
    uint16_t addr;
    std::string_view name;
};

constexpr std::array kTable{
    Entry{sstatus, "sstatus"},       Entry{sie, "sie"},
    Entry{stvec, "stvec"},           Entry{scounteren, "scounteren"},
    Entry{sscratch, "sscratch"},     Entry{sepc, "sepc"},
    Entry{scause, "scause"},         Entry{stval, "stval"},
    Entry{sip, "sip"},               Entry{satp, "satp"},
    Entry{vsstatus, "vsstatus"},     Entry{vsie, "vsie"},
    Entry{vstvec, "vstvec"},         Entry{vsscratch, "vsscratch"},
    Entry{vsepc, "vsepc"},           Entry{vscause, "vscause"},
    Entry{vstval, "vstval"},         Entry{vsip, "vsip"},
    Entry{vsatp, "vsatp"},           Entry{hstatus, "hstatus"},
    Entry{hedeleg, "hedeleg"},       Entry{hideleg, "hideleg"},
    Entry{hie, "hie"},               Entry{htimedelta, "htimedelta"},
    Entry{hcounteren, "hcounteren"}, Entry{hgeie, "hgeie"},
    Entry{htval, "htval"},           Entry{hip, "hip"},
    Entry{hvip, "hvip"},             Entry{htinst, "htinst"},
    Entry{hgatp, "hgatp"},           Entry{hgeip, "hgeip"},
    Entry{mstatus, "mstatus"},       Entry{misa, "misa"},
    Entry{medeleg, "medeleg"},       Entry{mideleg, "mideleg"},
    Entry{mie, "mie"},               Entry{mtvec, "mtvec"},
    Entry{mscratch, "mscratch"},     Entry{mepc, "mepc"},
    Entry{mcause, "mcause"},         Entry{mtval, "mtval"},
    Entry{mip, "mip"},               Entry{mtinst, "mtinst"},
    Entry{mtval2, "mtval2"},         Entry{mhartid, "mhartid"},
    Entry{cycle, "cycle"},           Entry{time, "time"},
    Entry{instret, "instret"},
};

} // namespace

std::optional<std::string_view> name(uint16_t addr) {
    for (const auto& e : kTable)
        if (e.addr == addr) return e.name;
    return std::nullopt;
}

std::optional<uint16_t> lookup(std::string_view n) {
    for (const auto& e : kTable)
        if (e.name == n) return e.addr;
    return std::nullopt;
}

bool implemented(uint16_t addr) { return name(addr).has_value(); }

} // namespace csr

namespace {

using namespace irq;

constexpr reg_t kMisa = (2ull << 62) | (1u << ('A' - 'A')) | (1u << ('H' - 'A')) |
                        (1u << ('I' - 'A')) | (1u << ('M' - 'A')) | (1u << ('S' - 'A')) |
                        (1u << ('U' - 'A'));

constexpr reg_t kSstatusMask =
    status::SIE | status::SPIE | status::SPP | status::SUM | status::MXR | status::UXL;
constexpr reg_t kSstatusWritable = status::SIE | status::SPIE | status::SPP | status::SUM | status::MXR;
constexpr reg_t kMstatusWritable = kSstatusWritable | status::MIE | status::MPIE | status::MPP |
                                   status::MPRV | status::TVM | status::TSR | status::GVA |
                                   status::MPV;
constexpr reg_t kHstatusWritable = hstatus_bits::GVA | hstatus_bits::SPV | hstatus_bits::SPVP |
                                   hstatus_bits::HU | hstatus_bits::VGEIN | hstatus_bits::VTVM |
                                   hstatus_bits::VTSR;

constexpr reg_t cause_bit(Exception e) { return 1ull << static_cast<unsigned>(e); }

constexpr reg_t kMedelegWritable =
    cause_bit(Exception::InstructionAddressMisaligned) | cause_bit(Exception::InstructionAccessFault) |
    cause_bit(Exception::IllegalInstruction) | cause_bit(Exception::Breakpoint) |
    cause_bit(Exception::LoadAddressMisaligned) | cause_bit(Exception::LoadAccessFault) |
    cause_bit(Exception::StoreAmoAddressMisaligned) | cause_bit(Exception::StoreAmoAccessFault) |
    cause_bit(Exception::EcallFromU) | cause_bit(Exception::EcallFromS) |
    cause_bit(Exception::EcallFromVS) | cause_bit(Exception::InstructionPageFault) |
    cause_bit(Exception::LoadPageFault) | cause_bit(Exception::StoreAmoPageFault) |
    cause_bit(Exception::InstructionGuestPageFault) | cause_bit(Exception::LoadGuestPageFault) |
    cause_bit(Exception::VirtualInstruction) | cause_bit(Exception::StoreAmoGuestPageFault);

// Causes that can never be delegated to VS.
constexpr reg_t kHedelegReadOnlyZero =
    cause_bit(Exception::EcallFromS) | cause_bit(Exception::EcallFromVS) |
    cause_bit(Exception::EcallFromM) | cause_bit(Exception::InstructionGuestPageFault) |
    cause_bit(Exception::LoadGuestPageFault) | cause_bit(Exception::VirtualInstruction) |
    cause_bit(Exception::StoreAmoGuestPageFault);
constexpr reg_t kHedelegWritable = kMedelegWritable & ~kHedelegReadOnlyZero;

reg_t warl_atp(reg_t old, reg_t value) {
    const reg_t mode = atp::mode(value);
    if (mode != atp::MODE_BARE && mode != atp::MODE_SV39) return old;
    // No ASID support: ASID reads as zero.
    return atp::make(mode, atp::ppn(value));
}

reg_t warl_hgatp(reg_t old, reg_t value) {
    const reg_t mode = atp::mode(value);
    if (mode != atp::MODE_BARE && mode != atp::MODE_SV39X4) return old;
    // No VMID support; the root table is 16 KiB aligned.
    return atp::make(mode, atp::ppn(value) & ~reg_t{3});
}

reg_t replace(reg_t old, reg_t value, reg_t mask) { return (old & ~mask) | (value & mask); }

bool is_supervisor_shadowed(uint16_t addr) {
    switch (addr) {
    case csr::sstatus:
    case csr::sie:
    case csr::stvec:
    case csr::sscratch:
    case csr::sepc:
    case csr::scause:
    case csr::stval:
    case csr::sip:
    case csr::satp: return true;
    default: return false;
    }
}

reg_t read_csr(const HartState& hart, const Clint& clint, uint16_t addr) {
    const CsrFile& c = hart.csrs;
    switch (addr) {
    case csr::sstatus: return c.mstatus & kSstatusMask;
    case csr::sie: return c.sie();
    case csr::stvec: return c.stvec;
    case csr::scounteren: return c.scounteren;
    case csr::sscratch: return c.sscratch;
    case csr::sepc: return c.sepc;
    case csr::scause: return c.scause;
    case csr::stval: return c.stval;
    case csr::sip: return c.sip();
    case csr::satp: return c.satp;

    case csr::vsstatus: return c.vsstatus & kSstatusMask;
    case csr::vsie: return c.vsie();
    case csr::vstvec: return c.vstvec;
    case csr::vsscratch: return c.vsscratch;
    case csr::vsepc: return c.vsepc;
    case csr::vscause: return c.vscause;
    case csr::vstval: return c.vstval;
    case csr::vsip: return c.vsip();
    case csr::vsatp: return c.vsatp;

    case csr::hstatus: return c.hstatus;
    case csr::hedeleg: return c.hedeleg;
    case csr::hideleg: return c.hideleg;
    case csr::hie: return c.hie();
    case csr::htimedelta: return clint.htimedelta(hart.hart_id);
    case csr::hcounteren: return c.hcounteren;
    case csr::hgeie: return c.hgeie;
    case csr::htval: return c.htval;
    case csr::hip: return c.hip();
    case csr::hvip: return c.hvip;
    case csr::htinst: return c.htinst;
    case csr::hgatp: return c.hgatp;
    case csr::hgeip: return c.hgeip();

    case csr::mstatus: return c.mstatus;
    case csr::misa: return kMisa;
    case csr::medeleg: return c.medeleg;
    case csr::mideleg: return c.mideleg();
    case csr::mie: return c.mie;
    case csr::mtvec: return c.mtvec;
    case csr::mscratch: return c.mscratch;
    case csr::mepc: return c.mepc;
    case csr::mcause: return c.mcause;
    case csr::mtval: return c.mtval;
    case csr::mip: return c.mip();
    case csr::mtinst: return c.mtinst;
    case csr::mtval2: return c.mtval2;
    case csr::mhartid: return hart.hart_id;

    case csr::cycle:
    case csr::instret: return hart.instret;
    case csr::time: return hart.ctx.virt ? clint.vstime(hart.hart_id) : clint.mtime();
    default: return 0;
    }
}

void write_csr(HartState& hart, Clint& clint, uint16_t addr, reg_t v) {
    CsrFile& c = hart.csrs;
    const bool hardwired_inst = !has_mutation(c.mutations, Mutation::htinst_zero);
    switch (addr) {
    case csr::sstatus: c.mstatus = replace(c.mstatus, v, kSstatusWritable); break;
    case csr::sie: {
        const reg_t mask = c.mideleg() & S_BITS;
        c.mie = replace(c.mie, v, mask);
        break;
    }
    case csr::stvec: c.stvec = v & ~reg_t{3}; break;
    case csr::scounteren: c.scounteren = v & 7; break;
    case csr::sscratch: c.sscratch = v; break;
    case csr::sepc: c.sepc = v & ~reg_t{3}; break;
    case csr::scause: c.scause = v; break;
    case csr::stval: c.stval = v; break;
    case csr::sip: {
        const reg_t mask = c.mideleg() & SSIP;
        c.mip_sw = replace(c.mip_sw, v, mask);
        break;
    }
    case csr::satp: c.satp = warl_atp(c.satp, v); break;

    case csr::vsstatus: c.vsstatus = replace(c.vsstatus, v, kSstatusWritable); break;
    case csr::vsie: {
        const reg_t mask = c.hideleg & VS_BITS;
        c.mie = replace(c.mie, v << 1, mask);
        break;
    }
    case csr::vstvec: c.vstvec = v & ~reg_t{3}; break;
    case csr::vsscratch: c.vsscratch = v; break;
    case csr::vsepc: c.vsepc = v & ~reg_t{3}; break;
    case csr::vscause: c.vscause = v; break;
    case csr::vstval: c.vstval = v; break;
    case csr::vsip: {
        const reg_t mask = c.hideleg & VSSIP;
        c.hvip = replace(c.hvip, v << 1, mask);
        break;
    }
    case csr::vsatp: c.vsatp = warl_atp(c.vsatp, v); break;

    case csr::hstatus: {
        reg_t next = replace(c.hstatus, v, kHstatusWritable);
        const reg_t vgein = (v & hstatus_bits::VGEIN) >> hstatus_bits::VGEIN_SHIFT;
        if (vgein > c.geilen) next = replace(next, c.hstatus, hstatus_bits::VGEIN);
        c.hstatus = next;
        break;
    }
    case csr::hedeleg: c.hedeleg = v & kHedelegWritable; break;
    case csr::hideleg: c.hideleg = v & VS_BITS; break;
    case csr::hie: {
        const reg_t mask = VS_BITS | (c.geilen ? SGEIP : 0);
        c.mie = replace(c.mie, v, mask);
        break;
    }
    case csr::htimedelta: clint.set_htimedelta(hart.hart_id, v); break;
    case csr::hcounteren: c.hcounteren = v & 2; break; // TM only
    case csr::hgeie: c.hgeie = v & c.geie_mask(); break;
    case csr::htval: c.htval = v; break;
    case csr::hip: c.hvip = replace(c.hvip, v, VSSIP); break;
    case csr::hvip: c.hvip = v & VS_BITS; break;
    case csr::htinst: c.htinst = hardwired_inst ? 0 : v; break;
    case csr::hgatp: c.hgatp = warl_hgatp(c.hgatp, v); break;

    case csr::mstatus: {
        reg_t next = replace(c.mstatus, v, kMstatusWritable);
        if (((v & status::MPP) >> status::MPP_SHIFT) == 2) next = replace(next, c.mstatus, status::MPP);
        c.mstatus = next;
        break;
    }
    case csr::medeleg: c.medeleg = v & kMedelegWritable; break;
    case csr::mideleg: c.mideleg_sw = v & S_BITS; break;
    case csr::mie: {
        const reg_t mask = S_BITS | VS_BITS | M_BITS | (c.geilen ? SGEIP : 0);
        c.mie = v & mask;
        break;
    }
    case csr::mtvec: c.mtvec = v & ~reg_t{3}; break;
    case csr::mscratch: c.mscratch = v; break;
    case csr::mepc: c.mepc = v & ~reg_t{3}; break;
    case csr::mcause: c.mcause = v; break;
    case csr::mtval: c.mtval = v; break;
    case csr::mip:
        // STIP is driven by the CLINT supervisor timer and is not writable.
        c.mip_sw = replace(c.mip_sw, v, SSIP | SEIP);
        c.hvip = replace(c.hvip, v, VSSIP);
        break;
    case csr::mtinst: c.mtinst = hardwired_inst ? 0 : v; break;
    case csr::mtval2: c.mtval2 = v; break;
    default: break; // read-only
    }
}

// Value used as the base of csrrs/csrrc: the software-writable state only, so
// that a hardware-driven SEIP is never latched into the software bit.
reg_t rmw_base(const HartState& hart, const Clint& clint, uint16_t addr) {
    const reg_t v = read_csr(hart, clint, addr);
    if (addr == csr::mip && hart.csrs.hw.seip && !(hart.csrs.mip_sw & SEIP)) return v & ~SEIP;
    return v;
}

TrapInfo illegal() { return TrapInfo::of(Exception::IllegalInstruction); }

TrapInfo virtual_instruction(const CsrFile& c) {
    if (has_mutation(c.mutations, Mutation::virtual_instruction)) return illegal();
    return TrapInfo::of(Exception::VirtualInstruction);
}

// Counter CSR gating; only hcounteren.TM is implemented at the H level.
MaybeTrap check_counter(const HartState& hart, uint16_t addr) {
    const CsrFile& c = hart.csrs;
    const reg_t bit = 1ull << (addr - csr::cycle);
    const PrivilegeContext ctx = hart.ctx;
    if (ctx.is_m() || ctx.is_hs()) return std::nullopt;
    if (ctx.virt) {
        const bool tm_bypass =
            addr == csr::time && has_mutation(c.mutations, Mutation::hcounteren_tm);
        if (!(c.hcounteren & bit) && !tm_bypass) return virtual_instruction(c);
        if (ctx.is_vu() && !(c.scounteren & bit)) return virtual_instruction(c);
        return std::nullopt;
    }
    if (!(c.scounteren & bit)) return illegal();
    return std::nullopt;
}

} // namespace

reg_t CsrFile::mideleg() const noexcept {
    return mideleg_sw | VS_BITS | (geilen ? SGEIP : 0);
}

reg_t CsrFile::geie_mask() const noexcept {
    if (geilen == 0) return 0;
    const reg_t upto = geilen >= 63 ? ~reg_t{0} : (1ull << (geilen + 1)) - 1;
    return upto & ~reg_t{1};
}

reg_t CsrFile::mip() const noexcept {
    reg_t v = mip_sw & (SSIP | SEIP);
    if (hw.seip) v |= SEIP;
    if (hw.msip) v |= MSIP;
    if (hw.mtip) v |= MTIP;
    if (hw.stip) v |= STIP;
    if (hw.meip) v |= MEIP;
    v |= hvip & (VSSIP | VSTIP | VSEIP);
    if (hw.vstip) v |= VSTIP;
    const unsigned sel = vgein();
    if (sel != 0 && !has_mutation(mutations, Mutation::vgein_select) && ((hgeip() >> sel) & 1))
        v |= VSEIP;
    if (hgeip() & hgeie) v |= SGEIP;
    return v;
}

reg_t CsrFile::hip() const noexcept { return mip() & (VS_BITS | SGEIP); }

reg_t CsrFile::sip() const noexcept { return mip() & mideleg() & S_BITS; }

reg_t CsrFile::sie() const noexcept { return mie & mideleg() & S_BITS; }

reg_t CsrFile::vsip() const noexcept { return (mip() & hideleg & VS_BITS) >> 1; }

reg_t CsrFile::vsie() const noexcept { return (mie & hideleg & VS_BITS) >> 1; }

Result<reg_t> csr_access(HartState& hart, Clint& clint, uint16_t addr, CsrOp op, reg_t operand) {
    if (!csr::implemented(addr)) return illegal();
    const CsrFile& c = hart.csrs;
    const bool writes = op != CsrOp::read;
    const PrivilegeContext ctx = hart.ctx;

    if (writes && (addr >> 10) == 3) return illegal();

    uint16_t target = addr;
    switch ((addr >> 8) & 3) {
    case 3:
        if (!ctx.is_m()) return illegal();
        break;
    case 2:
        if (ctx.virt) return virtual_instruction(c);
        if (ctx.priv == Priv::U) return illegal();
        break;
    case 1:
        if (ctx.virt) {
            if (ctx.priv == Priv::U) return virtual_instruction(c);
            if (is_supervisor_shadowed(addr) && !has_mutation(c.mutations, Mutation::vs_shadow))
                target = static_cast<uint16_t>(addr + 0x100);
        } else if (ctx.priv == Priv::U) {
            return illegal();
        }
        break;
    case 0:
        if (auto t = check_counter(hart, addr)) return *t;
        break;
    }

    if (addr == csr::satp) {
        if (ctx.is_hs() && (c.mstatus & status::TVM)) return illegal();
        if (ctx.is_vs() && (c.hstatus & hstatus_bits::VTVM)) return virtual_instruction(c);
    }
    if (addr == csr::hgatp && ctx.is_hs() && (c.mstatus & status::TVM)) return illegal();

    const reg_t old = read_csr(hart, clint, target);
    if (writes) {
        const reg_t base = rmw_base(hart, clint, target);
        reg_t next = operand;
        if (op == CsrOp::set) next = base | operand;
        if (op == CsrOp::clear) next = base & ~operand;
        write_csr(hart, clint, target, next);
    }
    return old;
}

reg_t csr_peek(const HartState& hart, const Clint& clint, uint16_t addr) {
    return read_csr(hart, clint, addr);
}

void csr_poke(HartState& hart, Clint& clint, uint16_t addr, reg_t value) {
    write_csr(hart, clint, addr, value);
}

InterruptPair interrupt_view(const CsrFile& csrs, InterruptViewKind view) {
    switch (view) {
    case InterruptViewKind::m: return {csrs.mip(), csrs.mie};
    case InterruptViewKind::s: return {csrs.sip(), csrs.sie()};
    case InterruptViewKind::vs: return {csrs.vsip(), csrs.vsie()};
    case InterruptViewKind::h: return {csrs.hip(), csrs.hie()};
    }
    return {};
}

} // namespace hvsim
