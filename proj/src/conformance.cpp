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

#include "hvsim/conformance.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ostream>

namespace hvsim {

namespace {

std::string hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

constexpr reg_t ebit(Exception e) { return 1ull << static_cast<unsigned>(e); }

// Guest address layout used by the units.
constexpr addr_t kVa = 0x1000'0000;
constexpr addr_t kGpa = 0x4000'0000;
constexpr uint8_t kU = pte::U;

addr_t page(Harness& h, unsigned n) { return h.data_base() + n * 0x1000ull; }

void delegate_all(Harness& h) {
    h.set_csr(csr::medeleg, ~0ull);
    h.set_csr(csr::mideleg, ~0ull);
}

// va -> gpa -> pa, one 4 KiB page.
void guest_map(Harness& h, addr_t va, addr_t gpa, addr_t pa, uint8_t s1, uint8_t s2) {
    Mapping m;
    m.va = va;
    m.gpa = gpa;
    m.pa = pa;
    m.s1 = s1;
    m.s2 = s2;
    h.map(m);
}

// Stage 2 only (vsatp stays Bare): gpa -> pa.
void gstage_map(Harness& h, addr_t gpa, addr_t pa, uint8_t s2, unsigned level = 0) {
    Mapping m;
    m.va = gpa;
    m.pa = pa;
    m.s2 = s2;
    m.s2_level = level;
    m.stage1 = false;
    h.map(m);
}

uint64_t load_ok(UnitContext& u, addr_t va, unsigned width, const std::string& what) {
    Access a = u.h.load(va, width);
    u.check(a.ok(), what + ": unexpected " + (a.trap ? a.trap->to_string() : std::string()));
    return a.value.value();
}

addr_t plic(Harness& h, addr_t off) { return h.bus().map().plic_base + off; }
addr_t clint(Harness& h, addr_t off) { return h.bus().map().clint_base + off; }

void refresh(Harness& h) { h.machine().refresh_lines(h.selected_hart()); }

// ---------------------------------------------------------------- hstatus

void hstatus_spv_spvp(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::medeleg, ebit(Exception::EcallFromVS) | ebit(Exception::EcallFromU) |
                                ebit(Exception::EcallFromS));
    h.goto_priv(kModeVS);
    auto t = h.exec(rv::fixed(Op::ecall), false);
    u.expect_trap(t, Exception::EcallFromVS, kModeHS, "ecall in VS");
    reg_t hs = h.csr(csr::hstatus);
    u.check(hs & hstatus_bits::SPV, "SPV set after trap from VS");
    u.check(hs & hstatus_bits::SPVP, "SPVP set after trap from VS");
    h.recover(*t);

    h.goto_priv(kModeVU);
    t = h.exec(rv::fixed(Op::ecall), false);
    u.expect_trap(t, Exception::EcallFromU, kModeHS, "ecall in VU");
    hs = h.csr(csr::hstatus);
    u.check(hs & hstatus_bits::SPV, "SPV set after trap from VU");
    u.check(!(hs & hstatus_bits::SPVP), "SPVP clear after trap from VU");
    h.recover(*t);

    h.goto_priv(kModeHS);
    t = h.exec(rv::fixed(Op::ecall), false);
    u.expect_trap(t, Exception::EcallFromS, kModeHS, "ecall in HS");
    u.check(!(h.csr(csr::hstatus) & hstatus_bits::SPV), "SPV clear after trap from HS");
    h.recover(*t);
    u.check(h.mode() == kModeHS, "sret with SPV=0 stays in HS");
}

void mstatus_mpv(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeVS);
    auto t = h.exec(rv::fixed(Op::ecall), false);
    u.expect_trap(t, Exception::EcallFromVS, kModeM, "ecall in VS");
    reg_t ms = h.csr(csr::mstatus);
    u.check(ms & status::MPV, "MPV set after trap from VS");
    u.expect_eq((ms & status::MPP) >> status::MPP_SHIFT, 1, "MPP");
    h.recover(*t);
    u.check(h.mode() == kModeVS, "mret with MPV=1 returns to VS");

    h.goto_priv(kModeHS);
    t = h.exec(rv::fixed(Op::ecall), false);
    u.expect_trap(t, Exception::EcallFromS, kModeM, "ecall in HS");
    u.check(!(h.csr(csr::mstatus) & status::MPV), "MPV clear after trap from HS");
    h.recover(*t);
}

void hstatus_gva(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    h.enable_stage2();
    h.goto_priv(kModeVS);
    auto t = h.exec(rv::i(Op::ld, 10, 0, 0), false);
    h.set_reg(10, kGpa);
    h.recover(*t);
    // x0 + 0 is gpa 0, unmapped
    u.expect_trap(t, Exception::LoadGuestPageFault, kModeHS, "load of unmapped gpa");
    u.check(h.csr(csr::hstatus) & hstatus_bits::GVA, "GVA set for guest page fault");
    t = h.exec(rv::fixed(Op::ecall), false);
    u.expect_trap(t, Exception::EcallFromVS, kModeHS, "ecall in VS");
    u.check(!(h.csr(csr::hstatus) & hstatus_bits::GVA), "GVA clear for ecall");
    h.recover(*t);

    // Same fault taken in M sets mstatus.GVA.
    h.set_csr(csr::medeleg, 0);
    t = h.exec(rv::i(Op::ld, 10, 0, 0), false);
    u.expect_trap(t, Exception::LoadGuestPageFault, kModeM, "undelegated guest fault");
    u.check(h.csr(csr::mstatus) & status::GVA, "mstatus.GVA set");
    h.recover(*t);
}

void mstatus_tvm(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::mstatus, h.csr(csr::mstatus) | status::TVM);
    h.goto_priv(kModeHS);
    auto r = h.csr_read(csr::satp);
    u.check(!r && r.trap().cause.is(Exception::IllegalInstruction), "satp under TVM");
    r = h.csr_read(csr::hgatp);
    u.check(!r && r.trap().cause.is(Exception::IllegalInstruction), "hgatp under TVM");
    u.expect_trap(h.exec(rv::fence2(Op::sfence_vma)), Exception::IllegalInstruction, kModeM,
                  "sfence.vma under TVM");
    u.expect_trap(h.exec(rv::fence2(Op::hfence_gvma)), Exception::IllegalInstruction, kModeM,
                  "hfence.gvma under TVM");
    u.expect_none(h.exec(rv::fence2(Op::hfence_vvma)), "hfence.vvma ignores TVM");
    h.set_csr(csr::mstatus, h.csr(csr::mstatus) & ~status::TVM);
    r = h.csr_read(csr::satp);
    u.check(r.ok(), "satp without TVM");
}

void mstatus_tsr(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::mstatus, h.csr(csr::mstatus) | status::TSR);
    h.goto_priv(kModeHS);
    u.expect_trap(h.exec(rv::fixed(Op::sret)), Exception::IllegalInstruction, kModeM, "sret under TSR");
    u.check(h.mode() == kModeHS, "still in HS");
}

void hstatus_vtsr(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::VTSR);
    h.goto_priv(kModeVS);
    const Instruction sret = rv::fixed(Op::sret);
    auto t = h.exec(sret);
    u.expect_trap(t, Exception::VirtualInstruction, kModeM, "sret in VS under VTSR");
    u.expect_eq(t->tval, encode(sret), "tval holds the instruction");
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) & ~hstatus_bits::VTSR);
    h.set_csr(csr::vsstatus, h.csr(csr::vsstatus) | status::SPP);
    h.set_csr(csr::vsepc, h.csr(csr::vsepc));
    u.expect_none(h.exec(sret), "sret in VS without VTSR");
}

void hstatus_vtvm(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::VTVM);
    h.goto_priv(kModeVS);
    auto r = h.csr_read(csr::satp);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "satp in VS under VTVM");
    u.expect_trap(h.exec(rv::fence2(Op::sfence_vma)), Exception::VirtualInstruction, kModeM,
                  "sfence.vma in VS under VTVM");
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) & ~hstatus_bits::VTVM);
    r = h.csr_read(csr::satp);
    u.check(r.ok(), "satp in VS without VTVM");
}

// ---------------------------------------------------------------- delegation

void deleg_vu_ecall(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::medeleg, ebit(Exception::EcallFromU));
    h.set_csr(csr::hedeleg, ebit(Exception::EcallFromU));
    h.goto_priv(kModeVU);
    u.expect_trap(h.exec(rv::fixed(Op::ecall)), Exception::EcallFromU, kModeVS, "VU ecall, both delegated");
    u.expect_eq(h.csr(csr::vscause), 8, "vscause");
    h.set_csr(csr::hedeleg, 0);
    u.expect_trap(h.exec(rv::fixed(Op::ecall)), Exception::EcallFromU, kModeHS, "VU ecall, medeleg only");
    h.set_csr(csr::medeleg, 0);
    u.expect_trap(h.exec(rv::fixed(Op::ecall)), Exception::EcallFromU, kModeM, "VU ecall, none");
    h.set_csr(csr::hedeleg, ebit(Exception::EcallFromU));
    u.expect_trap(h.exec(rv::fixed(Op::ecall)), Exception::EcallFromU, kModeM, "hedeleg alone has no effect");
}

void deleg_hedeleg_zero_bits(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hedeleg, ~0ull);
    const reg_t v = h.csr(csr::hedeleg);
    for (Exception e : {Exception::EcallFromS, Exception::EcallFromVS, Exception::EcallFromM,
                        Exception::InstructionGuestPageFault, Exception::LoadGuestPageFault,
                        Exception::VirtualInstruction, Exception::StoreAmoGuestPageFault})
        u.check(!(v & ebit(e)), "hedeleg bit " + std::to_string(static_cast<int>(e)) + " reads zero");
    u.check(v & ebit(Exception::LoadPageFault), "hedeleg LoadPageFault writable");
    delegate_all(h);
    h.enable_stage2();
    h.goto_priv(kModeVS);
    u.expect_trap(h.exec(rv::i(Op::ld, 10, 0, 0)), Exception::LoadGuestPageFault, kModeHS,
                  "guest page fault never reaches VS");
}

void deleg_mideleg_vs_bits(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::mideleg, 0);
    const reg_t v = h.csr(csr::mideleg);
    u.expect_eq(v & (irq::VS_BITS | irq::SGEIP), irq::VS_BITS | irq::SGEIP, "mideleg VS/SGEI bits");
    u.expect_eq(v & irq::S_BITS, 0, "S bits cleared");
    h.set_csr(csr::mideleg, ~0ull);
    u.expect_eq(h.csr(csr::mideleg) & irq::M_BITS, 0, "M bits never delegable");
}

void deleg_vs_interrupt_target(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::mie, irq::VSSIP);
    h.set_csr(csr::hideleg, irq::VSSIP);
    h.goto_priv(kModeVU);
    h.set_csr(csr::hvip, irq::VSSIP);
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorSoftware, kModeVS, "VSSI with hideleg");
    u.expect_eq(h.csr(csr::vscause), (1ull << 63) | 1, "vscause uses the supervisor code");
    h.set_csr(csr::hvip, 0);
    h.recover(*t);
    u.check(h.mode() == kModeVU, "back in VU");

    h.set_csr(csr::hideleg, 0);
    h.set_csr(csr::hvip, irq::VSSIP);
    t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorSoftware, kModeHS, "VSSI without hideleg");
    u.expect_eq(h.csr(csr::scause), (1ull << 63) | 2, "scause keeps the VS code");
    h.set_csr(csr::hvip, 0);
    h.recover(*t);
}

// ---------------------------------------------------------------- interrupt CSRs

void irq_hvip_vsip(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hideleg, irq::VS_BITS);
    h.set_csr(csr::hvip, irq::VS_BITS);
    u.expect_eq(h.csr(csr::hip) & irq::VS_BITS, irq::VS_BITS, "hip mirrors hvip");
    u.expect_eq(h.csr(csr::mip) & irq::VS_BITS, irq::VS_BITS, "mip mirrors hvip");
    h.goto_priv(kModeVS);
    auto r = h.csr_read(csr::sip);
    u.check(r.ok(), "sip readable in VS");
    u.expect_eq(*r, irq::S_BITS, "sip in VS is vsip");
    h.set_csr(csr::hideleg, irq::VSSIP);
    r = h.csr_read(csr::sip);
    u.expect_eq(*r, irq::SSIP, "vsip masked by hideleg");
    // VS may clear its software pending bit through sip.
    auto w = h.csr_write(csr::sip, 0);
    u.check(w.ok(), "sip writable in VS");
    u.expect_eq(h.csr(csr::hvip) & irq::VSSIP, 0, "VSSIP cleared through vsip");
}

void irq_vsie_view(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hideleg, irq::VS_BITS);
    h.goto_priv(kModeVS);
    auto w = h.csr_write(csr::sie, irq::S_BITS);
    u.check(w.ok(), "sie writable in VS");
    u.expect_eq(h.csr(csr::mie), irq::VS_BITS, "VS enables land in mie VS bits");
    u.expect_eq(h.csr(csr::hie), irq::VS_BITS, "hie view");
    u.expect_eq(h.csr(csr::sie), 0, "HS sie untouched");
    auto r = h.csr_read(csr::sie);
    u.expect_eq(*r, irq::S_BITS, "sie in VS reads vsie");
}

void irq_hip_hie_alias(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeHS);
    auto w = h.csr_write(csr::hip, irq::VS_BITS);
    u.check(w.ok(), "hip write in HS");
    u.expect_eq(h.csr(csr::hvip), irq::VSSIP, "only VSSIP writable through hip");
    w = h.csr_write(csr::hie, ~0ull);
    u.expect_eq(h.csr(csr::mie), irq::VS_BITS | irq::SGEIP, "hie writes VS and SGEI enables");
    auto r = h.csr_read(csr::sip);
    u.expect_eq(*r & irq::VS_BITS, 0, "sip never shows VS bits");
}

// ---------------------------------------------------------------- hgeip / hgeie

// Makes physical source 5 pending for VS context g of hart 0.
void raise_vs_context(Harness& h, unsigned g) {
    Plic& p = h.bus().plic;
    const unsigned ctx = p.context_index(0, Plic::ContextKind::VS, g);
    p.set_priority(5, 1);
    p.set_enable(ctx, 5, true);
    p.set_source_level(5, true);
    refresh(h);
}

void hgei_vgein_select(UnitContext& u) {
    Harness& h = u.h;
    raise_vs_context(h, 1);
    u.expect_eq(h.hart().csrs.hw.hgeip, 0b10, "hgeip line 1");
    h.set_csr(csr::hgeie, ~0ull);
    u.expect_eq(h.csr(csr::hgeip), 0b10, "hgeip CSR");
    u.expect_eq(h.csr(csr::hip) & irq::VSEIP, 0, "VGEIN=0 selects nothing");
    h.set_csr(csr::hstatus, 1ull << hstatus_bits::VGEIN_SHIFT);
    u.expect_eq(h.csr(csr::hip) & irq::VSEIP, irq::VSEIP, "VGEIN=1 raises VSEIP");
    h.set_csr(csr::hstatus, 2ull << hstatus_bits::VGEIN_SHIFT);
    u.expect_eq(h.csr(csr::hip) & irq::VSEIP, 0, "VGEIN=2 selects the idle context");
    h.set_csr(csr::hstatus, 3ull << hstatus_bits::VGEIN_SHIFT);
    u.expect_eq((h.csr(csr::hstatus) & hstatus_bits::VGEIN) >> hstatus_bits::VGEIN_SHIFT, 2,
                "VGEIN beyond GEILEN keeps the old value");
}

void hgei_sgeip(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hgeie, ~0ull);
    u.expect_eq(h.csr(csr::hgeie), 0b110, "hgeie keeps bits 1..GEILEN");
    h.set_csr(csr::hgeie, 0);
    raise_vs_context(h, 2);
    u.expect_eq(h.csr(csr::hip) & irq::SGEIP, 0, "SGEIP masked by hgeie");
    h.set_csr(csr::hgeie, 0b100);
    u.expect_eq(h.csr(csr::hip) & irq::SGEIP, irq::SGEIP, "SGEIP from hgeip & hgeie");
    h.set_csr(csr::hgeie, 0b010);
    u.expect_eq(h.csr(csr::hip) & irq::SGEIP, 0, "other context enabled only");
}

void hgei_hgeip_read_only(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeHS);
    auto r = h.csr_read(csr::hgeip);
    u.check(r.ok(), "hgeip readable in HS");
    auto w = h.csr_write(csr::hgeip, ~0ull);
    u.check(!w && w.trap().cause.is(Exception::IllegalInstruction), "hgeip write illegal");
    h.goto_priv(kModeVS);
    r = h.csr_read(csr::hgeip);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "hgeip from VS");
}

// ---------------------------------------------------------------- counters, time

void hcounteren_tm(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::hcounteren, ~0ull);
    u.expect_eq(h.csr(csr::hcounteren), 2, "only TM implemented");
    h.set_csr(csr::hcounteren, 0);
    h.goto_priv(kModeVS);
    auto r = h.csr_read(csr::time);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "time in VS without TM");
    h.set_csr(csr::hcounteren, 2);
    h.bus().clint.set_htimedelta(0, 100);
    r = h.csr_read(csr::time);
    u.check(r.ok(), "time in VS with TM");
    u.expect_eq(*r, h.bus().clint.mtime() + 100, "VS time is vstime");
    h.goto_priv(kModeVU);
    r = h.csr_read(csr::time);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "VU also needs scounteren");
    h.set_csr(csr::scounteren, 2);
    r = h.csr_read(csr::time);
    u.check(r.ok(), "VU time with TM and scounteren");
}

void htimedelta_dual_view(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeHS);
    auto w = h.csr_write(csr::htimedelta, 1000);
    u.check(w.ok(), "htimedelta write in HS");
    u.expect_eq(h.read_phys(clint(h, Clint::kHtimedelta)), 1000, "CLINT view of CSR write");
    h.write_phys(clint(h, Clint::kHtimedelta), 5000);
    auto r = h.csr_read(csr::htimedelta);
    u.expect_eq(*r, 5000, "CSR view of CLINT write");
    h.machine().tick();
    h.machine().tick();
    const uint64_t mtime = h.bus().clint.mtime();
    u.expect_eq(h.read_phys(clint(h, Clint::kVstime)), mtime + 5000, "vstime register");
    h.set_csr(csr::hcounteren, 2);
    h.goto_priv(kModeVS);
    r = h.csr_read(csr::time);
    u.expect_eq(*r, mtime + 5000, "guest time");
}

// ---------------------------------------------------------------- htval / mtval2 / htinst

void tval2_htval(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    h.enable_stage2();
    h.goto_priv(kModeVS);
    const addr_t gpa = 0x1234'5678;
    Access a = h.load(gpa, 8);
    u.check(!a.ok(), "unmapped gpa faults");
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "load");
    u.expect_eq(a.trap->tval, gpa, "stval holds the guest va");
    u.expect_eq(h.csr(csr::htval), gpa >> 2, "htval = gpa >> 2");
    a = h.store(gpa + 0x1000, 1, 8);
    u.expect_trap(a.trap, Exception::StoreAmoGuestPageFault, kModeHS, "store");
    u.expect_eq(h.csr(csr::htval), (gpa + 0x1000) >> 2, "htval for store");
}

void tval2_mtval2(UnitContext& u) {
    Harness& h = u.h;
    h.enable_stage2();
    h.goto_priv(kModeVS);
    const addr_t gpa = 0x2345'6788;
    Access a = h.load(gpa, 8);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeM, "undelegated load");
    u.expect_eq(h.csr(csr::mtval2), gpa >> 2, "mtval2 = gpa >> 2");
    u.expect_eq(h.csr(csr::mtval), gpa, "mtval holds the guest va");
    u.expect_eq(a.trap->tval2, gpa >> 2, "recorded tval2");
}

void tinst_zero(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::htinst, ~0ull);
    h.set_csr(csr::mtinst, ~0ull);
    u.expect_eq(h.csr(csr::htinst), 0, "htinst");
    u.expect_eq(h.csr(csr::mtinst), 0, "mtinst");
    h.goto_priv(kModeHS);
    auto w = h.csr_write(csr::htinst, 0x1234);
    u.check(w.ok(), "htinst writable in HS");
    u.expect_eq(h.csr(csr::htinst), 0, "htinst after HS write");
}

// ---------------------------------------------------------------- hgatp

void hgatp_warl(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeHS);
    const reg_t vmid = 0x3FFFull << 44;
    auto w = h.csr_write(csr::hgatp, atp::make(8, 0x80123) | vmid);
    u.check(w.ok(), "hgatp write in HS");
    u.expect_eq(*h.csr_read(csr::hgatp), atp::make(8, 0x80120), "Sv39x4, no VMID, 16 KiB root");
    (void)h.csr_write(csr::hgatp, atp::make(9, 0x90000));
    u.expect_eq(*h.csr_read(csr::hgatp), atp::make(8, 0x80120), "Sv48x4 rejected");
    (void)h.csr_write(csr::hgatp, atp::make(10, 0x90000));
    u.expect_eq(atp::mode(*h.csr_read(csr::hgatp)), 8, "Sv57x4 rejected");
    (void)h.csr_write(csr::hgatp, 0);
    u.expect_eq(*h.csr_read(csr::hgatp), 0, "Bare accepted");
}

void hgatp_vi_from_vs(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeHS);
    u.check(h.csr_read(csr::hgatp).ok(), "hgatp in HS");
    h.goto_priv(kModeVS);
    auto r = h.csr_read(csr::hgatp);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "hgatp in VS");
    h.goto_priv(kModeU);
    r = h.csr_read(csr::hgatp);
    u.check(!r && r.trap().cause.is(Exception::IllegalInstruction), "hgatp in U");
}

// ---------------------------------------------------------------- vs CSRs

void vs_shadow_sentinels(UnitContext& u) {
    Harness& h = u.h;
    const std::pair<uint16_t, uint16_t> pairs[] = {
        {csr::sscratch, csr::vsscratch}, {csr::sepc, csr::vsepc}, {csr::stvec, csr::vstvec},
        {csr::scause, csr::vscause},     {csr::stval, csr::vstval},
    };
    reg_t n = 0x100;
    for (auto [s, vs] : pairs) {
        h.set_csr(s, 0xAA00 + n);
        h.set_csr(vs, 0xBB00 + n);
        n += 4;
    }
    h.set_csr(csr::satp, atp::make(8, 0x81000));
    h.set_csr(csr::vsatp, atp::make(8, 0x82000));
    h.goto_priv(kModeVS);
    n = 0x100;
    for (auto [s, vs] : pairs) {
        auto r = h.csr_read(s);
        u.check(r.ok(), "supervisor CSR readable in VS");
        u.expect_eq(*r, 0xBB00 + n, std::string(*csr::name(s)) + " in VS reads " + std::string(*csr::name(vs)));
        n += 4;
    }
    u.expect_eq(*h.csr_read(csr::satp), atp::make(8, 0x82000), "satp in VS reads vsatp");
    (void)h.csr_write(csr::sscratch, 0x5555);
    u.expect_eq(h.csr(csr::vsscratch), 0x5555, "write lands in vsscratch");
    u.expect_eq(h.csr(csr::sscratch), 0xAA00 + 0x100, "sscratch untouched");
    (void)h.csr_write(csr::satp, 0);
    u.expect_eq(h.csr(csr::vsatp), 0, "satp write lands in vsatp");
    u.expect_eq(h.csr(csr::satp), atp::make(8, 0x81000), "satp untouched");
    auto r = h.csr_read(csr::vsscratch);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "vs* by name from VS");
}

void vs_status_shadow(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeVS);
    auto w = h.csr_write(csr::sstatus, status::SUM | status::SIE);
    u.check(w.ok(), "sstatus writable in VS");
    u.expect_eq(h.csr(csr::vsstatus) & (status::SUM | status::SIE), status::SUM | status::SIE, "vsstatus");
    u.expect_eq(h.csr(csr::mstatus) & (status::SUM | status::SIE), 0, "mstatus untouched");
    // A trap to VS stacks into vsstatus only.
    h.set_csr(csr::medeleg, ebit(Exception::Breakpoint));
    h.set_csr(csr::hedeleg, ebit(Exception::Breakpoint));
    auto t = h.exec(rv::fixed(Op::ebreak), false);
    u.expect_trap(t, Exception::Breakpoint, kModeVS, "ebreak delegated to VS");
    const reg_t vs = h.csr(csr::vsstatus);
    u.check((vs & status::SPIE) && !(vs & status::SIE) && (vs & status::SPP), "vsstatus stacking");
    u.expect_eq(h.csr(csr::sepc), 0, "sepc untouched by a VS trap");
    h.recover(*t);
}

// ---------------------------------------------------------------- hlv / hlvx / hsv

void hlv_two_stage(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW | kU);
    h.write_phys(page(h, 0) + 8, 0x1122'3344'5566'7788);
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::SPVP);
    h.goto_priv(kModeHS);
    Access a = h.hlv(Op::hlv_d, kVa + 8);
    u.check(a.ok(), "hlv.d");
    u.expect_eq(a.value.value(), 0x1122'3344'5566'7788, "hlv.d value");
    a = h.hlv(Op::hlv_b, kVa + 8);
    u.expect_eq(a.value.value(), 0xFFFF'FFFF'FFFF'FF88, "hlv.b sign-extends");
    a = h.hlv(Op::hlv_wu, kVa + 12);
    u.expect_eq(a.value.value(), 0x1122'3344, "hlv.wu");
    a = h.hsv(Op::hsv_w, kVa + 16, 0xCAFE'F00D);
    u.check(a.ok(), "hsv.w");
    u.expect_eq(h.read_phys(page(h, 0) + 16, 4), 0xCAFE'F00D, "hsv.w reached pa");
    // The HS view of the same va is untranslated and different.
    u.check(h.load(kVa + 8).trap.has_value(), "plain load of the guest va faults in HS");
}

void hlvx_execute_only(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kXO, kRWX | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRX, kRO | kU);
    h.write_phys(page(h, 0), 0x0000'0013);
    h.write_phys(page(h, 1), 0x0010'0073);
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::SPVP);
    h.goto_priv(kModeHS);
    Access a = h.hlv(Op::hlvx_wu, kVa);
    u.check(a.ok(), "hlvx.wu on an execute-only page");
    u.expect_eq(a.value.value(), 0x13, "hlvx.wu value");
    a = h.hlv(Op::hlv_w, kVa);
    u.expect_trap(a.trap, Exception::LoadPageFault, kModeHS, "hlv.w on an execute-only page");
    a = h.hlv(Op::hlvx_hu, kVa + 0x1000);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "hlvx needs X at stage 2");
    u.expect_eq(a.trap->gpa.value(), kGpa + 0x1000, "gpa");
}

void hlv_hu_gating(UnitContext& u) {
    Harness& h = u.h;
    guest_map(h, kVa, kGpa, page(h, 0), kRW | kU, kRW | kU);
    h.goto_priv(kModeU);
    Access a = h.hlv(Op::hlv_d, kVa);
    u.expect_trap(a.trap, Exception::IllegalInstruction, kModeM, "hlv in U without HU");
    a = h.hsv(Op::hsv_d, kVa, 1);
    u.expect_trap(a.trap, Exception::IllegalInstruction, kModeM, "hsv in U without HU");
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::HU);
    a = h.hlv(Op::hlv_d, kVa);
    u.check(a.ok(), "hlv in U with HU (VU access)");
}

void hlv_vi_from_guest(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeVS);
    const Instruction in = rv::hlv(Op::hlv_w, 10, 11);
    auto t = h.exec(in);
    u.expect_trap(t, Exception::VirtualInstruction, kModeM, "hlv in VS");
    u.expect_eq(t->tval, encode(in), "tval");
    h.goto_priv(kModeVU);
    u.expect_trap(h.exec(rv::hsv(Op::hsv_b, 10, 11)), Exception::VirtualInstruction, kModeM, "hsv in VU");
}

void hlv_spvp(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRW | kU, kRW | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRW, kRW | kU);
    h.goto_priv(kModeHS);
    // SPVP=0: VU permissions.
    u.check(h.hlv(Op::hlv_d, kVa).ok(), "VU access to a user page");
    u.expect_trap(h.hlv(Op::hlv_d, kVa + 0x1000).trap, Exception::LoadPageFault, kModeHS,
                  "VU access to a supervisor page");
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::SPVP);
    u.check(h.hlv(Op::hlv_d, kVa + 0x1000).ok(), "VS access to a supervisor page");
    u.expect_trap(h.hlv(Op::hlv_d, kVa).trap, Exception::LoadPageFault, kModeHS,
                  "VS access to a user page without vsstatus.SUM");
    h.set_csr(csr::vsstatus, h.csr(csr::vsstatus) | status::SUM);
    u.check(h.hlv(Op::hlv_d, kVa).ok(), "VS access to a user page with vsstatus.SUM");
}

// ---------------------------------------------------------------- fences

void hfence_gvma_flush(UnitContext& u) {
    Harness& h = u.h;
    gstage_map(h, kGpa, page(h, 0), kRW | kU);
    gstage_map(h, kGpa + 0x1000, page(h, 2), kRW | kU);
    h.write_phys(page(h, 0), 111);
    h.write_phys(page(h, 1), 222);
    h.goto_priv(kModeVS);
    u.expect_eq(load_ok(u, kGpa, 8, "first access"), 111, "before remap");
    const auto slot = h.pte_address(true, false, kGpa, 0);
    u.check(slot.has_value(), "stage-2 leaf exists");
    h.write_phys(slot.value(), Pte::make(page(h, 1) >> 12, kRW | kU | pte::V).raw);
    h.goto_priv(kModeHS);
    // Operands name an unrelated gpa; the whole guest TLB goes.
    h.set_reg(10, (kGpa + 0x1000) >> 2);
    u.expect_none(h.exec(rv::fence2(Op::hfence_gvma, 10, 0)), "hfence.gvma");
    h.goto_priv(kModeVS);
    u.expect_eq(load_ok(u, kGpa, 8, "after fence"), 222, "after remap");
}

void hfence_vvma_flush(UnitContext& u) {
    Harness& h = u.h;
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRW, kRW | kU);
    h.write_phys(page(h, 0), 111);
    h.write_phys(page(h, 1), 222);
    h.goto_priv(kModeVS);
    u.expect_eq(load_ok(u, kVa, 8, "first access"), 111, "before remap");
    const auto slot = h.pte_address(false, true, kVa, 0);
    u.check(slot.has_value(), "stage-1 leaf exists");
    h.write_phys(slot.value(), Pte::make((kGpa + 0x1000) >> 12, kRW | pte::V).raw);
    h.goto_priv(kModeHS);
    h.set_reg(10, kVa + 0x5000);
    h.set_reg(11, 77);
    u.expect_none(h.exec(rv::fence2(Op::hfence_vvma, 10, 11)), "hfence.vvma with operands");
    h.goto_priv(kModeVS);
    u.expect_eq(load_ok(u, kVa, 8, "after fence"), 222, "operands ignored");
}

void sfence_in_vs(UnitContext& u) {
    Harness& h = u.h;
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRW, kRW | kU);
    h.write_phys(page(h, 0), 111);
    h.write_phys(page(h, 1), 222);
    h.goto_priv(kModeVS);
    u.expect_eq(load_ok(u, kVa, 8, "first access"), 111, "before remap");
    const auto slot = h.pte_address(false, true, kVa, 0);
    h.write_phys(slot.value(), Pte::make((kGpa + 0x1000) >> 12, kRW | pte::V).raw);
    u.expect_none(h.exec(rv::fence2(Op::sfence_vma)), "sfence.vma in VS");
    u.expect_eq(load_ok(u, kVa, 8, "after fence"), 222, "guest sfence flushes guest entries");
}

// ---------------------------------------------------------------- ecall

void ecall_vs_cause(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeVS);
    auto t = h.exec(rv::fixed(Op::ecall));
    u.expect_trap(t, Exception::EcallFromVS, kModeM, "ecall in VS");
    u.expect_eq(h.csr(csr::mcause), 10, "mcause");
    u.check(t->origin == kModeVS, "origin VS");
}

void ecall_vs_never_to_vs(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::medeleg, ebit(Exception::EcallFromVS));
    h.set_csr(csr::hedeleg, ~0ull);
    h.goto_priv(kModeVS);
    u.expect_trap(h.exec(rv::fixed(Op::ecall)), Exception::EcallFromVS, kModeHS, "ecall in VS");
    u.expect_eq(h.csr(csr::scause), 10, "scause");
}

// ---------------------------------------------------------------- guest page faults

void gpf_kinds(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRWX, kRO | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x10'0000, page(h, 1), kRWX, kRW | kU);
    h.goto_priv(kModeVS);
    Access a = h.fetch(kVa);
    u.expect_trap(a.trap, Exception::InstructionGuestPageFault, kModeHS, "fetch from non-X gpa");
    u.expect_eq(a.trap->gpa.value(), kGpa, "fetch gpa");
    u.expect_eq(a.trap->tval, kVa, "fetch tval");
    u.check(load_ok(u, kVa + 8, 8, "load") == 0, "load from R gpa");
    a = h.store(kVa + 0x18, 1, 8);
    u.expect_trap(a.trap, Exception::StoreAmoGuestPageFault, kModeHS, "store to R-only gpa");
    u.expect_eq(a.trap->gpa.value(), kGpa + 0x18, "store gpa keeps the page offset");
    u.expect_eq(a.trap->tval2, (kGpa + 0x18) >> 2, "htval");
    h.set_reg(10, kVa + 0x1000);
    auto t = h.exec(rv::amo(Op::amoadd_d, 11, 10, 0));
    u.expect_none(t, "amo on RW gpa");
    h.set_reg(10, kVa);
    t = h.exec(rv::amo(Op::amoadd_d, 11, 10, 0));
    u.expect_trap(t, Exception::StoreAmoGuestPageFault, kModeHS, "amo on R-only gpa");
}

void gpf_stage1_first(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRO, kRW | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRW, kRO | kU);
    guest_map(h, kVa + 0x2000, kGpa + 0x2000, page(h, 2), kRO, kRO | kU);
    h.goto_priv(kModeVS);
    Access a = h.store(kVa, 1);
    u.expect_trap(a.trap, Exception::StoreAmoPageFault, kModeHS, "stage-1 R-only store");
    u.check(!a.trap->gpa, "no gpa for a stage-1 fault");
    a = h.store(kVa + 0x1000, 1);
    u.expect_trap(a.trap, Exception::StoreAmoGuestPageFault, kModeHS, "stage-2 R-only store");
    u.expect_eq(a.trap->gpa.value(), kGpa + 0x1000, "gpa");
    a = h.store(kVa + 0x2000, 1);
    u.expect_trap(a.trap, Exception::StoreAmoPageFault, kModeHS, "both deny: stage 1 wins");
}

void gpf_stage2_user(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW);
    h.goto_priv(kModeVS);
    Access a = h.load(kVa);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "stage-2 leaf without U");
    u.expect_eq(a.trap->gpa.value(), kGpa, "gpa");
}

void gpf_wide_gpa(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    h.enable_stage2();
    h.goto_priv(kModeVS);
    const addr_t wide = 1ull << kGpaBits;
    Access a = h.load(wide | 0x40);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "Bare vsatp, gpa >= 2^41");
    u.expect_eq(a.trap->gpa.value(), wide | 0x40, "gpa");

    Mapping m;
    m.va = kVa;
    m.gpa = wide;
    m.s1 = kRW;
    m.stage2 = false;
    h.map(m);
    a = h.load(kVa + 0x10);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "stage-1 leaf beyond 41 bits");
    u.expect_eq(a.trap->gpa.value(), wide + 0x10, "leaf gpa");

    // A non-leaf stage-1 entry pointing past 41 bits faults on the table read.
    const addr_t va2 = 0x20'0000'0000;
    const auto root_slot = h.pte_address(false, true, va2, 2).value();
    h.write_phys(root_slot, Pte::make(wide >> 12, pte::V).raw);
    a = h.load(va2);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "table gpa beyond 41 bits");
    u.expect_eq(a.trap->gpa.value(), wide, "table entry gpa");
    u.expect_eq(a.trap->tval, va2, "tval is the guest va");
}

void gpf_implicit_access(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRWX, kRWX | kU);
    const addr_t root = h.vsatp_root();
    const auto slot = h.pte_address(true, false, root, 0);
    u.check(slot.has_value(), "root page is mapped at stage 2");
    h.write_phys(slot.value(), 0);
    const addr_t entry = root + ((kVa >> 30) & 0x1FF) * 8;
    h.goto_priv(kModeVS);
    Access a = h.load(kVa);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "load, table unmapped");
    u.expect_eq(a.trap->gpa.value(), entry, "gpa of the table entry");
    a = h.store(kVa, 1);
    u.expect_trap(a.trap, Exception::StoreAmoGuestPageFault, kModeHS, "store reports its own kind");
    a = h.fetch(kVa);
    u.expect_trap(a.trap, Exception::InstructionGuestPageFault, kModeHS, "fetch reports its own kind");
    u.check(h.csr(csr::hstatus) & hstatus_bits::GVA, "GVA");
}

void gpf_tlb_recheck(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRO | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRO, kRW | kU);
    h.goto_priv(kModeVS);
    load_ok(u, kVa, 8, "load from R-only gpa");
    Access a = h.store(kVa, 1);
    u.expect_trap(a.trap, Exception::StoreAmoGuestPageFault, kModeHS, "store after a load");
    load_ok(u, kVa + 0x1000, 8, "load from R-only va");
    a = h.store(kVa + 0x1000, 1);
    u.expect_trap(a.trap, Exception::StoreAmoPageFault, kModeHS, "store after a load, stage 1");
    u.expect_eq(h.read_phys(page(h, 0)), 0, "memory unchanged");
}

void gpf_superpages(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    h.enable_stage2();
    const addr_t bad = 0xC000'0000;
    const auto slot = h.pte_address(true, false, bad, 2).value();
    h.write_phys(slot, Pte::make((h.machine().config().map.ram_base >> 12) + 1, kRW | kU | pte::V).raw);
    h.goto_priv(kModeVS);
    Access a = h.load(bad);
    u.expect_trap(a.trap, Exception::LoadGuestPageFault, kModeHS, "misaligned 1 GiB stage-2 leaf");

    // 2 MiB stage 1 over a 1 GiB stage 2.
    const addr_t ram = h.machine().config().map.ram_base;
    Mapping m;
    m.va = 0x2000'0000;
    m.gpa = 0x4000'0000;
    m.pa = ram;
    m.s1 = kRW;
    m.s1_level = 1;
    m.s2 = kRW | kU;
    m.s2_level = 2;
    h.map(m);
    const addr_t off = (page(h, 3) - ram) + 0x238;
    h.write_phys(ram + off, 0xABCD);
    u.check(off < (2ull << 20), "offset inside the 2 MiB page");
    u.expect_eq(load_ok(u, m.va + off, 8, "superpage load"), 0xABCD, "superpage value");
    Access s = h.store(m.va + off + 8, 0x77);
    u.check(s.ok(), "superpage store");
    u.expect_eq(h.read_phys(ram + off + 8), 0x77, "superpage store value");
}

void gpf_access_dirty(UnitContext& u) {
    Harness& h = u.h;
    delegate_all(h);
    guest_map(h, kVa, kGpa, page(h, 0), kRW, pte::R | pte::W | kU);
    guest_map(h, kVa + 0x1000, kGpa + 0x1000, page(h, 1), kRW, pte::R | pte::W | pte::A | kU);
    h.goto_priv(kModeVS);
    u.expect_trap(h.load(kVa).trap, Exception::LoadGuestPageFault, kModeHS, "stage-2 A clear");
    load_ok(u, kVa + 0x1000, 8, "A set, D clear, load");
    u.expect_trap(h.store(kVa + 0x1000, 1).trap, Exception::StoreAmoGuestPageFault, kModeHS,
                  "stage-2 D clear");
    const auto slot = h.pte_address(true, false, kGpa + 0x1000, 0);
    u.check(slot.has_value(), "stage-2 leaf exists");
    u.expect_eq(h.read_phys(slot.value()) & pte::D, 0, "hardware never sets D");
}

// ---------------------------------------------------------------- virtual instruction

void vi_csr_access(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeVS);
    const Instruction in = rv::csrr(10, csr::hstatus);
    auto t = h.exec(in);
    u.expect_trap(t, Exception::VirtualInstruction, kModeM, "hstatus in VS");
    u.expect_eq(t->tval, encode(in), "tval");
    h.goto_priv(kModeVU);
    u.expect_trap(h.exec(rv::csrr(10, csr::sstatus)), Exception::VirtualInstruction, kModeM,
                  "sstatus in VU");
    h.goto_priv(kModeU);
    u.expect_trap(h.exec(rv::csrr(10, csr::hstatus)), Exception::IllegalInstruction, kModeM,
                  "hstatus in U is illegal");
    h.goto_priv(kModeVS);
    u.expect_trap(h.exec(rv::csrr(10, csr::mstatus)), Exception::IllegalInstruction, kModeM,
                  "M CSR in VS is illegal");
}

void vi_fences(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::medeleg, ebit(Exception::VirtualInstruction));
    h.goto_priv(kModeVS);
    u.expect_trap(h.exec(rv::fence2(Op::hfence_vvma)), Exception::VirtualInstruction, kModeHS,
                  "hfence.vvma in VS");
    u.expect_trap(h.exec(rv::fence2(Op::hfence_gvma)), Exception::VirtualInstruction, kModeHS,
                  "hfence.gvma in VS");
    h.goto_priv(kModeVU);
    u.expect_trap(h.exec(rv::fence2(Op::sfence_vma)), Exception::VirtualInstruction, kModeHS,
                  "sfence.vma in VU");
    u.expect_trap(h.exec(rv::fixed(Op::sret)), Exception::VirtualInstruction, kModeHS, "sret in VU");
    h.goto_priv(kModeU);
    u.expect_trap(h.exec(rv::fence2(Op::sfence_vma)), Exception::IllegalInstruction, kModeM,
                  "sfence.vma in U");
}

// ---------------------------------------------------------------- VS interrupts

void vs_enable_guest(Harness& h, reg_t bits) {
    h.set_csr(csr::hideleg, bits);
    h.set_csr(csr::mie, bits);
    h.set_csr(csr::vsstatus, h.csr(csr::vsstatus) | status::SIE);
}

void vsirq_software(UnitContext& u) {
    Harness& h = u.h;
    vs_enable_guest(h, irq::VSSIP);
    h.goto_priv(kModeVS);
    u.expect_none(h.exec(rv::nop()), "nothing pending");
    h.set_csr(csr::hvip, irq::VSSIP);
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorSoftware, kModeVS, "VSSI");
    u.expect_eq(h.csr(csr::vscause), (1ull << 63) | 1, "vscause");
    h.set_csr(csr::hvip, 0);
    h.recover(*t);
    h.set_csr(csr::vsstatus, h.csr(csr::vsstatus) & ~status::SIE);
    h.set_csr(csr::hvip, irq::VSSIP);
    u.expect_none(h.exec(rv::nop()), "masked by vsstatus.SIE");
}

void vsirq_timer(UnitContext& u) {
    Harness& h = u.h;
    vs_enable_guest(h, irq::VSTIP);
    h.goto_priv(kModeVS);
    h.bus().clint.set_htimedelta(0, 50);
    h.write_phys(clint(h, Clint::kVstimecmp), 60);
    u.expect_none(h.exec(rv::nop()), "vstime below vstimecmp");
    for (int i = 0; i < 10; ++i) h.machine().tick();
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorTimer, kModeVS, "vstimecmp reached");
    u.expect_eq(h.csr(csr::vscause), (1ull << 63) | 5, "vscause");
    h.write_phys(clint(h, Clint::kVstimecmp), ~0ull);
    h.recover(*t);
    u.expect_none(h.exec(rv::nop()), "line drops with vstimecmp");
}

void vsirq_external(UnitContext& u) {
    Harness& h = u.h;
    vs_enable_guest(h, irq::VSEIP);
    h.goto_priv(kModeVS);
    h.set_csr(csr::hvip, irq::VSEIP);
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorExternal, kModeVS, "hvip.VSEIP");
    u.expect_eq(h.csr(csr::vscause), (1ull << 63) | 9, "vscause");
    h.set_csr(csr::hvip, 0);
    h.recover(*t);
    raise_vs_context(h, 2);
    h.set_csr(csr::hstatus, 2ull << hstatus_bits::VGEIN_SHIFT);
    t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorExternal, kModeVS, "guest external line");
    h.set_csr(csr::hstatus, 0);
    h.recover(*t);
    u.expect_none(h.exec(rv::nop()), "VGEIN=0");
}

void vsirq_to_hs(UnitContext& u) {
    Harness& h = u.h;
    h.set_csr(csr::mie, irq::VSTIP);
    h.set_csr(csr::hvip, irq::VSTIP);
    h.goto_priv(kModeHS);
    u.expect_none(h.exec(rv::nop()), "HS with SIE=0 ignores it");
    h.goto_priv(kModeVS);
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::VirtualSupervisorTimer, kModeHS, "undelegated VSTI preempts VS");
    h.set_csr(csr::hvip, 0);
    h.recover(*t);
}

// ---------------------------------------------------------------- SGEI

void sgei_taken_in_hs(UnitContext& u) {
    Harness& h = u.h;
    raise_vs_context(h, 1);
    h.set_csr(csr::hgeie, 0b10);
    h.set_csr(csr::mie, irq::SGEIP);
    h.goto_priv(kModeHS);
    u.expect_none(h.exec(rv::nop()), "HS with SIE=0");
    h.goto_priv(kModeVS);
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::SupervisorGuestExternal, kModeHS, "SGEI while in VS");
    u.expect_eq(h.csr(csr::scause), (1ull << 63) | 12, "scause");
    h.set_csr(csr::hgeie, 0);
    h.recover(*t);
    u.expect_none(h.exec(rv::nop()), "hgeie cleared");
}

// ---------------------------------------------------------------- CLINT

void clint_stimecmp(UnitContext& u) {
    Harness& h = u.h;
    h.write_phys(clint(h, Clint::kStimecmp), 5);
    refresh(h);
    u.expect_eq(h.csr(csr::mip) & irq::STIP, 0, "before stimecmp");
    for (int i = 0; i < 5; ++i) h.machine().tick();
    refresh(h);
    u.expect_eq(h.csr(csr::mip) & irq::STIP, irq::STIP, "at stimecmp");
    h.set_csr(csr::mideleg, irq::STIP);
    h.set_csr(csr::mie, irq::STIP);
    h.goto_priv(kModeU);
    auto t = h.exec(rv::nop(), false);
    u.expect_trap(t, Interrupt::SupervisorTimer, kModeHS, "STI");
    h.write_phys(clint(h, Clint::kStimecmp), ~0ull);
    h.recover(*t);
    u.expect_none(h.exec(rv::nop()), "line dropped");
}

void clint_stime_ro(UnitContext& u) {
    Harness& h = u.h;
    for (int i = 0; i < 3; ++i) h.machine().tick();
    u.expect_eq(h.read_phys(clint(h, Clint::kStime)), h.bus().clint.mtime(), "stime mirrors mtime");
    u.check(!h.bus().write(clint(h, Clint::kStime), 8, 99), "stime write faults");
    u.check(!h.bus().write(clint(h, Clint::kVstime), 8, 99), "vstime write faults");
    Access a = h.store(clint(h, Clint::kStime), 1);
    u.expect_trap(a.trap, Exception::StoreAmoAccessFault, kModeM, "sd to stime");
    u.expect_eq(h.bus().clint.mtime(), 3, "mtime unchanged");
}

// ---------------------------------------------------------------- PLIC

void plic_physical_claim(UnitContext& u) {
    Harness& h = u.h;
    Plic& p = h.bus().plic;
    const unsigned s_ctx = p.context_index(0, Plic::ContextKind::S);
    h.write_phys(plic(h, p.priority_offset(5)), 2, 4);
    h.write_phys(plic(h, p.enable_offset(s_ctx)), 1u << 5, 4);
    p.set_source_level(5, true);
    refresh(h);
    u.expect_eq(h.csr(csr::mip) & irq::SEIP, irq::SEIP, "SEIP");
    h.write_phys(plic(h, p.threshold_offset(s_ctx)), 2, 4);
    refresh(h);
    u.expect_eq(h.csr(csr::mip) & irq::SEIP, 0, "threshold masks");
    h.write_phys(plic(h, p.threshold_offset(s_ctx)), 1, 4);
    h.goto_priv(kModeHS);
    u.expect_eq(load_ok(u, plic(h, p.claim_offset(s_ctx)), 4, "claim"), 5, "claimed id");
    u.expect_eq(load_ok(u, plic(h, p.claim_offset(s_ctx)), 4, "claim"), 0, "gateway closed");
    u.check(h.store(plic(h, p.claim_offset(s_ctx)), 5, 4).ok(), "complete");
    u.expect_eq(load_ok(u, plic(h, p.claim_offset(s_ctx)), 4, "claim"), 5, "level still high");
    p.set_source_level(5, false);
    u.check(h.store(plic(h, p.claim_offset(s_ctx)), 5, 4).ok(), "complete");
    u.expect_eq(load_ok(u, plic(h, p.claim_offset(s_ctx)), 4, "claim"), 0, "nothing pending");
}

void plic_viir_direct(UnitContext& u) {
    Harness& h = u.h;
    Plic& p = h.bus().plic;
    const unsigned vs_ctx = p.context_index(0, Plic::ContextKind::VS, 1);
    const addr_t ctx_page = plic(h, p.threshold_offset(vs_ctx));
    gstage_map(h, kGpa, ctx_page, kRW | kU);
    h.write_phys(plic(h, p.vcibir_offset(p.virtual_context_index(0, 1))), 1, 4);
    Viir v;
    v.id = 7;
    v.priority = 3;
    h.write_phys(plic(h, p.viir_offset(0, 0)), v.encode(), 4);
    h.set_csr(csr::hstatus, 1ull << hstatus_bits::VGEIN_SHIFT);
    refresh(h);
    u.expect_eq(h.csr(csr::hip) & irq::VSEIP, irq::VSEIP, "VIIR raises VSEIP");
    h.goto_priv(kModeVS);
    u.expect_eq(load_ok(u, kGpa + 4, 4, "guest claim"), 7, "claimed id");
    u.check(p.viir(0, 0).state() == Viir::State::in_flight, "VIIR in flight after claim");
    refresh(h);
    u.expect_eq(h.csr(csr::hip) & irq::VSEIP, 0, "VSEIP drops");
    u.expect_eq(load_ok(u, kGpa + 4, 4, "second claim"), 0, "no second claim");
    u.check(h.store(kGpa + 4, 7, 4).ok(), "guest complete");
    u.check(p.viir(0, 0).state() == Viir::State::empty, "VIIR empty after complete");
    u.expect_eq(h.traps().size(), 0, "no hypervisor involvement");
}

void plic_mgmt_events(UnitContext& u) {
    Harness& h = u.h;
    Plic& p = h.bus().plic;
    const unsigned vs_ctx = p.context_index(0, Plic::ContextKind::VS, 1);
    h.write_phys(plic(h, p.vcibir_offset(0)), 1, 4);
    h.write_phys(plic(h, p.ibmsr_offset(0)), Ibmsr::kEnableNoPending | Ibmsr::kEnableBadComplete, 4);
    uint64_t st = h.read_phys(plic(h, p.ibmsr_offset(0)), 4);
    u.check(st & Ibmsr::kStatusNoPending, "event (i) with no VIIR pending");
    u.check(p.source_level(p.mgmt_source(0)), "management source asserted");
    Viir v;
    v.id = 9;
    v.priority = 1;
    h.write_phys(plic(h, p.viir_offset(0, 1)), v.encode(), 4);
    st = h.read_phys(plic(h, p.ibmsr_offset(0)), 4);
    u.check(!(st & Ibmsr::kStatusNoPending), "event (i) clears once a VIIR is pending");
    u.check(!p.source_level(p.mgmt_source(0)), "management source deasserted");
    h.write_phys(plic(h, p.claim_offset(vs_ctx)), 33, 4);
    st = h.read_phys(plic(h, p.ibmsr_offset(0)), 4);
    u.check(st & Ibmsr::kStatusBadComplete, "event (ii) on complete of a non-present id");
    u.expect_eq(st >> Ibmsr::kAuxShift, 33, "offending id");
    u.check(p.source_level(p.mgmt_source(0)), "management source asserted by (ii)");
    h.write_phys(plic(h, p.ibmsr_offset(0)),
                 Ibmsr::kEnableNoPending | Ibmsr::kEnableBadComplete | Ibmsr::kStatusBadComplete, 4);
    st = h.read_phys(plic(h, p.ibmsr_offset(0)), 4);
    u.check(!(st & Ibmsr::kStatusBadComplete), "write one clears (ii)");
}

void plic_reset_gateways(UnitContext& u) {
    Harness& h = u.h;
    Plic& p = h.bus().plic;
    const unsigned s_ctx = p.context_index(0, Plic::ContextKind::S);
    auto arm = [&] {
        p.set_priority(5, 1);
        p.set_enable(s_ctx, 5, true);
        p.set_source_level(5, true);
    };
    arm();
    u.expect_eq(h.read_phys(plic(h, p.claim_offset(s_ctx)), 4), 5, "claim");
    u.check(p.source_claimed(5), "gateway closed");
    h.reset();
    u.check(!h.bus().plic.source_claimed(5), "reset reopens the gateway");
    Plic& q = h.bus().plic;
    q.set_priority(5, 1);
    q.set_enable(s_ctx, 5, true);
    q.set_source_level(5, true);
    refresh(h);
    u.expect_eq(h.csr(csr::mip) & irq::SEIP, irq::SEIP, "eip after reset");
    u.expect_eq(h.read_phys(plic(h, q.claim_offset(s_ctx)), 4), 5, "claim after reset");
}

// ---------------------------------------------------------------- TLB

void tlb_guest_tag(UnitContext& u) {
    Harness& h = u.h;
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW | kU);
    Mapping hs;
    hs.va = kVa;
    hs.pa = page(h, 1);
    hs.s1 = kRW;
    hs.guest = false;
    h.map(hs);
    h.write_phys(page(h, 0), 0x6);
    h.write_phys(page(h, 1), 0x5);
    for (int round = 0; round < 3; ++round) {
        h.goto_priv(kModeVS);
        u.expect_eq(load_ok(u, kVa, 8, "guest"), 0x6, "guest translation");
        h.goto_priv(kModeHS);
        u.expect_eq(load_ok(u, kVa, 8, "host"), 0x5, "host translation");
    }
    // hlv from HS uses the guest translation.
    h.set_csr(csr::hstatus, h.csr(csr::hstatus) | hstatus_bits::SPVP);
    Access a = h.hlv(Op::hlv_d, kVa);
    u.check(a.ok(), "hlv from HS");
    u.expect_eq(a.value.value(), 0x6, "hlv shares the guest entry");
}

// ---------------------------------------------------------------- harness

void harness_goto_priv(UnitContext& u) {
    Harness& h = u.h;
    h.goto_priv(kModeVS);
    auto r = h.csr_read(csr::hgatp);
    u.check(!r && r.trap().cause.is(Exception::VirtualInstruction), "VS probe");
    h.goto_priv(kModeHS);
    u.check(h.csr_read(csr::hgatp).ok(), "HS probe");
    h.goto_priv(kModeVU);
    auto t = h.exec(rv::fixed(Op::ecall));
    u.expect_trap(t, Exception::EcallFromU, kModeM, "VU probe");
    u.check(t->origin == kModeVU, "origin VU");
    bool threw = false;
    try {
        h.goto_priv(PrivilegeContext{Priv::M, true});
    } catch (const ScenarioError&) {
        threw = true;
    }
    u.check(threw, "impossible target rejected");
}

void harness_map_conflict(UnitContext& u) {
    Harness& h = u.h;
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW | kU);
    bool threw = false;
    try {
        guest_map(h, kVa, kGpa + 0x1000, page(h, 1), kRW, kRW | kU);
    } catch (const ScenarioError&) {
        threw = true;
    }
    u.check(threw, "conflicting stage-1 mapping rejected");
    guest_map(h, kVa, kGpa, page(h, 0), kRW, kRW | kU);
    threw = false;
    try {
        gstage_map(h, kGpa + 0x1000, page(h, 0) + 0x800, kRW | kU);
    } catch (const ScenarioError&) {
        threw = true;
    }
    u.check(threw, "misaligned mapping rejected");
}

void harness_reset(UnitContext& u) {
    Harness& h = u.h;
    h.enable_stage2();
    h.write_phys(page(h, 0), 42);
    h.goto_priv(kModeVS);
    h.reset();
    u.expect_eq(h.csr(csr::hgatp), 0, "hgatp cleared");
    u.expect_eq(h.read_phys(page(h, 0)), 0, "RAM cleared");
    u.check(h.mode() == kModeM, "back in M");
    u.expect_eq(h.traps().size(), 0, "trap log cleared");
}

std::vector<Unit> build_units() {
    using F = Feature;
    return {
        {"hstatus.spv_spvp_on_trap", F::hstatus, hstatus_spv_spvp},
        {"hstatus.mpv_on_trap_to_m", F::hstatus, mstatus_mpv},
        {"hstatus.gva_on_guest_fault", F::hstatus, hstatus_gva},
        {"hstatus.tvm_traps_hs", F::hstatus, mstatus_tvm},
        {"hstatus.tsr_traps_sret", F::hstatus, mstatus_tsr},
        {"hstatus.vtsr_virtual_instruction", F::hstatus, hstatus_vtsr},
        {"hstatus.vtvm_virtual_instruction", F::hstatus, hstatus_vtvm},
        {"deleg.vu_ecall_two_level", F::delegation, deleg_vu_ecall},
        {"deleg.hedeleg_read_only_zero", F::delegation, deleg_hedeleg_zero_bits},
        {"deleg.mideleg_vs_bits_fixed", F::delegation, deleg_mideleg_vs_bits},
        {"deleg.vs_interrupt_target", F::delegation, deleg_vs_interrupt_target},
        {"irq.hvip_to_vsip", F::interrupt_csrs, irq_hvip_vsip},
        {"irq.vsie_view", F::interrupt_csrs, irq_vsie_view},
        {"irq.hip_hie_alias", F::interrupt_csrs, irq_hip_hie_alias},
        {"hgei.vgein_selects_vseip", F::hgeip_hgeie, hgei_vgein_select},
        {"hgei.sgeip_from_hgeie", F::hgeip_hgeie, hgei_sgeip},
        {"hgei.hgeip_read_only", F::hgeip_hgeie, hgei_hgeip_read_only},
        {"hcounteren.tm_only", F::hcounteren, hcounteren_tm},
        {"htimedelta.dual_view", F::htimedelta, htimedelta_dual_view},
        {"tval2.htval_gpa", F::tval2, tval2_htval},
        {"tval2.mtval2_gpa", F::tval2, tval2_mtval2},
        {"tinst.hardwired_zero", F::tinst, tinst_zero},
        {"hgatp.warl_modes", F::hgatp, hgatp_warl},
        {"hgatp.virtual_instruction_from_vs", F::hgatp, hgatp_vi_from_vs},
        {"vscsr.shadow_sentinels", F::vs_csrs, vs_shadow_sentinels},
        {"vscsr.vsstatus_shadow", F::vs_csrs, vs_status_shadow},
        {"hlv.two_stage_access", F::hyp_ldst, hlv_two_stage},
        {"hlv.hlvx_execute_only", F::hyp_ldst, hlvx_execute_only},
        {"hlv.hu_gating", F::hyp_ldst, hlv_hu_gating},
        {"hlv.virtual_instruction_in_guest", F::hyp_ldst, hlv_vi_from_guest},
        {"hlv.spvp_privilege", F::hyp_ldst, hlv_spvp},
        {"hfence.gvma_flushes_guest", F::hfence, hfence_gvma_flush},
        {"hfence.vvma_ignores_operands", F::hfence, hfence_vvma_flush},
        {"hfence.sfence_in_vs", F::hfence, sfence_in_vs},
        {"ecall.vs_cause_10", F::ecall_vs, ecall_vs_cause},
        {"ecall.vs_never_delegated_to_vs", F::ecall_vs, ecall_vs_never_to_vs},
        {"gpf.fetch_load_store_amo", F::guest_page_faults, gpf_kinds},
        {"gpf.stage1_checked_first", F::guest_page_faults, gpf_stage1_first},
        {"gpf.stage2_requires_user", F::guest_page_faults, gpf_stage2_user},
        {"gpf.gpa_beyond_41_bits", F::guest_page_faults, gpf_wide_gpa},
        {"gpf.implicit_table_access", F::guest_page_faults, gpf_implicit_access},
        {"gpf.tlb_permission_recheck", F::guest_page_faults, gpf_tlb_recheck},
        {"gpf.superpages", F::guest_page_faults, gpf_superpages},
        {"gpf.access_dirty_clear", F::guest_page_faults, gpf_access_dirty},
        {"vi.csr_access", F::virtual_instruction, vi_csr_access},
        {"vi.fences_and_sret", F::virtual_instruction, vi_fences},
        {"vsirq.software", F::vs_interrupts, vsirq_software},
        {"vsirq.timer", F::vs_interrupts, vsirq_timer},
        {"vsirq.external", F::vs_interrupts, vsirq_external},
        {"vsirq.undelegated_to_hs", F::vs_interrupts, vsirq_to_hs},
        {"sgei.taken_in_hs", F::sgei, sgei_taken_in_hs},
        {"clint.stimecmp_drives_stip", F::clint, clint_stimecmp},
        {"clint.stime_read_only", F::clint, clint_stime_ro},
        {"plic.physical_claim_complete", F::plic, plic_physical_claim},
        {"plic.viir_direct_claim", F::plic, plic_viir_direct},
        {"plic.management_events", F::plic, plic_mgmt_events},
        {"plic.reset_reopens_gateways", F::plic, plic_reset_gateways},
        {"tlb.guest_tag_isolation", F::tlb, tlb_guest_tag},
        {"harness.goto_priv_probe", F::harness, harness_goto_priv},
        {"harness.map_conflict", F::harness, harness_map_conflict},
        {"harness.reset_isolation", F::harness, harness_reset},
    };
}

const char* feature_key(Feature f) {
    switch (f) {
    case Feature::hstatus: return "hstatus";
    case Feature::delegation: return "deleg";
    case Feature::interrupt_csrs: return "irq";
    case Feature::hgeip_hgeie: return "hgei";
    case Feature::hcounteren: return "hcounteren";
    case Feature::htimedelta: return "htimedelta";
    case Feature::tval2: return "tval2";
    case Feature::tinst: return "tinst";
    case Feature::hgatp: return "hgatp";
    case Feature::vs_csrs: return "vscsr";
    case Feature::hyp_ldst: return "hlv";
    case Feature::hfence: return "hfence";
    case Feature::ecall_vs: return "ecall";
    case Feature::guest_page_faults: return "gpf";
    case Feature::virtual_instruction: return "vi";
    case Feature::vs_interrupts: return "vsirq";
    case Feature::sgei: return "sgei";
    case Feature::clint: return "clint";
    case Feature::plic: return "plic";
    case Feature::tlb: return "tlb";
    case Feature::harness: return "harness";
    case Feature::count_: break;
    }
    return "?";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct MutationName {
    Mutation m;
    const char* name;
};

constexpr MutationName kMutationNames[] = {
    {Mutation::hlvx_exec, "hlvx_exec"},
    {Mutation::vs_shadow, "vs_shadow"},
    {Mutation::gpa_report, "gpa_report"},
    {Mutation::hfence_flush, "hfence_flush"},
    {Mutation::tlb_recheck, "tlb_recheck"},
    {Mutation::vgein_select, "vgein_select"},
    {Mutation::hcounteren_tm, "hcounteren_tm"},
    {Mutation::ecall_vs_cause, "ecall_vs_cause"},
    {Mutation::stage2_user, "stage2_user"},
    {Mutation::virtual_instruction, "virtual_instruction"},
    {Mutation::viir_inflight, "viir_inflight"},
    {Mutation::htinst_zero, "htinst_zero"},
    {Mutation::clint_vstimer, "clint_vstimer"},
};

} // namespace

const std::vector<FeatureInfo>& feature_table() {
    static const std::vector<FeatureInfo> table{
        {Feature::hstatus, "CSRs", "hstatus/mstatus", Support::full, ""},
        {Feature::delegation, "CSRs", "hideleg/hedeleg/mideleg", Support::full, ""},
        {Feature::interrupt_csrs, "CSRs", "hvip/hip/hie/mip/mie", Support::full, ""},
        {Feature::hgeip_hgeie, "CSRs", "hgeip/hgeie", Support::full, ""},
        {Feature::hcounteren, "CSRs", "hcounteren", Support::partial, "TM bit only"},
        {Feature::htimedelta, "CSRs", "htimedelta", Support::partial, "CSR and CLINT register share one value"},
        {Feature::tval2, "CSRs", "mtval2/htval", Support::full, ""},
        {Feature::tinst, "CSRs", "mtinst/htinst", Support::none, "hardwired to zero"},
        {Feature::hgatp, "CSRs", "hgatp", Support::partial, "Bare and Sv39x4 only, no VMID"},
        {Feature::vs_csrs, "CSRs", "vs* CSRs", Support::full, ""},
        {Feature::hyp_ldst, "Instructions", "hlv/hlvx/hsv", Support::full, ""},
        {Feature::hfence, "Instructions", "hfence.vvma/gvma", Support::partial, "full guest flush, operands ignored"},
        {Feature::ecall_vs, "Exceptions", "ecall from VS", Support::full, ""},
        {Feature::guest_page_faults, "Exceptions", "guest page faults", Support::full, ""},
        {Feature::virtual_instruction, "Exceptions", "virtual instruction", Support::full, ""},
        {Feature::vs_interrupts, "Interrupts", "VS software/timer/external", Support::full, ""},
        {Feature::sgei, "Interrupts", "supervisor guest external", Support::full, ""},
        {Feature::clint, "Platform", "CLINT stimecmp/vstimecmp", Support::extension, ""},
        {Feature::plic, "Platform", "PLIC VS contexts and injection", Support::extension, ""},
        {Feature::tlb, "Platform", "guest-tagged TLB", Support::extension, ""},
        {Feature::harness, "Platform", "test harness", Support::extension, ""},
    };
    return table;
}

const FeatureInfo& feature_info(Feature f) {
    for (const auto& fi : feature_table())
        if (fi.feature == f) return fi;
    throw std::out_of_range("unknown feature");
}

const char* support_symbol(Support s) {
    switch (s) {
    case Support::full: return "●";
    case Support::partial: return "◐";
    case Support::none: return "○";
    case Support::extension: return "+";
    }
    return "?";
}

void UnitContext::check(bool cond, const std::string& what) {
    if (!cond) throw UnitFailure(what);
}

void UnitContext::expect_eq(uint64_t got, uint64_t want, const std::string& what) {
    if (got != want) throw UnitFailure(what + ": got " + hex(got) + ", want " + hex(want));
}

void UnitContext::expect_none(const std::optional<TrapRecord>& t, const std::string& what) {
    if (t) throw UnitFailure(what + ": unexpected trap " + t->to_string());
}

void UnitContext::expect_trap(const std::optional<TrapRecord>& t, Exception e, PrivilegeContext target,
                              const std::string& what) {
    const std::string want = cause_name(TrapCause::exception(e)) + " to " + std::string(mode_name(target));
    if (!t) throw UnitFailure(what + ": no trap, want " + want);
    if (!t->cause.is(e) || !(t->target == target))
        throw UnitFailure(what + ": got " + t->to_string() + ", want " + want);
}

void UnitContext::expect_trap(const std::optional<TrapRecord>& t, Interrupt i, PrivilegeContext target,
                              const std::string& what) {
    const std::string want = cause_name(TrapCause::interrupt(i)) + " to " + std::string(mode_name(target));
    if (!t) throw UnitFailure(what + ": no trap, want " + want);
    if (!t->cause.is(i) || !(t->target == target))
        throw UnitFailure(what + ": got " + t->to_string() + ", want " + want);
}

const std::vector<Unit>& conformance_units() {
    static const std::vector<Unit> units = build_units();
    return units;
}

size_t SuiteReport::passed() const {
    return static_cast<size_t>(std::count_if(results.begin(), results.end(), [](const UnitResult& r) { return r.passed; }));
}

size_t SuiteReport::failed() const { return results.size() - passed(); }

const UnitResult* SuiteReport::find(const std::string& name) const {
    for (const auto& r : results)
        if (r.name == name) return &r;
    return nullptr;
}

MachineConfig conformance_config(MutationSet mutations, std::optional<size_t> tlb_capacity) {
    MachineConfig c = Harness::default_config();
    c.map.ram_size = 8ull << 20;
    c.mutations = mutations;
    if (tlb_capacity) c.tlb_capacity = *tlb_capacity;
    return c;
}

bool unit_matches(const Unit& u, const std::string& filter) {
    if (filter.empty()) return true;
    const std::string f = lower(filter);
    return lower(u.name).find(f) != std::string::npos ||
           lower(feature_key(u.feature)).find(f) != std::string::npos ||
           lower(feature_info(u.feature).name).find(f) != std::string::npos;
}

UnitResult run_unit(const Unit& u, const SuiteOptions& opts) {
    UnitResult r;
    r.name = u.name;
    r.feature = u.feature;
    const auto start = std::chrono::steady_clock::now();
    Harness h(conformance_config(opts.mutations, opts.tlb_capacity));
    UnitContext ctx(h);
    try {
        u.body(ctx);
        r.passed = true;
    } catch (const UnitFailure& e) {
        r.message = e.what();
    } catch (const ScenarioError& e) {
        r.message = std::string("scenario error: ") + e.what();
    } catch (const std::exception& e) {
        r.message = std::string("exception: ") + e.what();
    }
    r.traps = h.traps();
    r.digest = h.trace_digest();
    r.steps = h.trace_steps();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

SuiteReport run_suite(const SuiteOptions& opts) {
    SuiteReport rep;
    std::vector<const Unit*> selected;
    for (const Unit& u : conformance_units())
        if (unit_matches(u, opts.filter)) selected.push_back(&u);
    if (opts.reverse) std::reverse(selected.begin(), selected.end());
    for (const Unit* u : selected) rep.results.push_back(run_unit(*u, opts));
    return rep;
}

void print_junit(std::ostream& os, const SuiteReport& report) {
    double total = 0;
    for (const auto& r : report.results) total += r.seconds;
    char t[32];
    std::snprintf(t, sizeof t, "%.3f", total);
    os << "<testsuite name=\"hvsim-conformance\" tests=\"" << report.results.size() << "\" failures=\""
       << report.failed() << "\" time=\"" << t << "\">\n";
    for (const auto& r : report.results) {
        std::snprintf(t, sizeof t, "%.4f", r.seconds);
        os << "  <testcase classname=\"" << feature_key(r.feature) << "\" name=\"" << xml_escape(r.name)
           << "\" time=\"" << t << "\"";
        if (r.passed) {
            os << "/>\n";
        } else {
            os << ">\n    <failure message=\"" << xml_escape(r.message) << "\"/>\n  </testcase>\n";
        }
    }
    os << "</testsuite>\n";
}

void print_feature_matrix(std::ostream& os, const SuiteReport& report) {
    os << "feature matrix\n";
    char line[160];
    for (const auto& fi : feature_table()) {
        size_t n = 0, ok = 0;
        for (const auto& r : report.results) {
            if (r.feature != fi.feature) continue;
            ++n;
            if (r.passed) ++ok;
        }
        if (n == 0) continue;
        std::snprintf(line, sizeof line, "  %s %-13s %-32s %2zu/%-2zu %s", support_symbol(fi.support), fi.group,
                      fi.name, ok, n, ok == n ? "pass" : "FAIL");
        os << line;
        if (*fi.subset) os << "  (" << fi.subset << ")";
        os << "\n";
    }
    os << "  " << report.passed() << "/" << report.results.size() << " units passed\n";
}

std::optional<Mutation> mutation_from_name(const std::string& name) {
    for (const auto& m : kMutationNames)
        if (name == m.name) return m.m;
    return std::nullopt;
}

const char* mutation_name(Mutation m) {
    for (const auto& mn : kMutationNames)
        if (mn.m == m) return mn.name;
    return "none";
}

const std::vector<Mutation>& all_mutations() {
    static const std::vector<Mutation> v = [] {
        std::vector<Mutation> out;
        for (const auto& m : kMutationNames) out.push_back(m.m);
        return out;
    }();
    return v;
}

} // namespace hvsim
