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

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "hvsim/clint.hpp"
#include "hvsim/csr.hpp"
#include "hvsim/hart.hpp"

using namespace hvsim;

namespace {

struct Fixture {
    explicit Fixture(unsigned geilen = 2) : hart(0, geilen), clint(1) {}
    HartState hart;
    Clint clint;

    Result<reg_t> access(PrivilegeContext ctx, uint16_t addr, CsrOp op = CsrOp::read, reg_t v = 0) {
        hart.ctx = ctx;
        return csr_access(hart, clint, addr, op, v);
    }
    reg_t peek(uint16_t a) const { return csr_peek(hart, clint, a); }
    void poke(uint16_t a, reg_t v) { csr_poke(hart, clint, a, v); }
};

std::vector<uint16_t> implemented_csrs() {
    std::vector<uint16_t> out;
    for (unsigned a = 0; a < 4096; ++a)
        if (csr::implemented(static_cast<uint16_t>(a))) out.push_back(static_cast<uint16_t>(a));
    return out;
}

bool is_trap(const Result<reg_t>& r, Exception e) {
    return !r.ok() && r.trap().cause.is(e);
}

} // namespace

TEST(Csr, HstatusResetFromHs) {
    Fixture f;
    const auto r = f.access(kModeHS, csr::hstatus);
    ASSERT_TRUE(r.ok());
    // VSXL is read-only 64-bit; every writable field resets to zero.
    EXPECT_EQ(*r & ~hstatus_bits::VSXL, 0u);
}

TEST(Csr, SatpFromVsHitsVsatp) {
    Fixture f;
    const reg_t v = atp::make(atp::MODE_SV39, 0x8'0123);
    ASSERT_TRUE(f.access(kModeVS, csr::satp, CsrOp::write, v).ok());
    EXPECT_EQ(f.peek(csr::vsatp), v);
    EXPECT_EQ(f.peek(csr::satp), 0u);
}

TEST(Csr, HgatpFromVsIsVirtualInstruction) {
    Fixture f;
    EXPECT_TRUE(is_trap(f.access(kModeVS, csr::hgatp), Exception::VirtualInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeVU, csr::hgatp), Exception::VirtualInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeVS, csr::vsatp), Exception::VirtualInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeU, csr::hgatp), Exception::IllegalInstruction));
    EXPECT_TRUE(f.access(kModeHS, csr::hgatp).ok());
}

TEST(Csr, InstructionRegistersHardwiredZero) {
    Fixture f;
    ASSERT_TRUE(f.access(kModeM, csr::mtinst, CsrOp::write, 0xFFFF).ok());
    ASSERT_TRUE(f.access(kModeM, csr::htinst, CsrOp::write, 0xFFFF).ok());
    EXPECT_EQ(*f.access(kModeM, csr::mtinst), 0u);
    EXPECT_EQ(*f.access(kModeHS, csr::htinst), 0u);
}

TEST(Csr, PrivilegeChecks) {
    Fixture f;
    EXPECT_TRUE(is_trap(f.access(kModeHS, csr::mstatus), Exception::IllegalInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeU, csr::sstatus), Exception::IllegalInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeVU, csr::sstatus), Exception::VirtualInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeM, csr::mhartid, CsrOp::write, 1), Exception::IllegalInstruction));
    EXPECT_TRUE(is_trap(f.access(kModeM, 0x7C0), Exception::IllegalInstruction)); // not implemented
}

TEST(Csr, TvmTrapsSatpFromHs) {
    Fixture f;
    f.poke(csr::mstatus, f.peek(csr::mstatus) | status::TVM);
    EXPECT_TRUE(is_trap(f.access(kModeHS, csr::satp), Exception::IllegalInstruction));
    EXPECT_TRUE(f.access(kModeM, csr::satp).ok());
    f.poke(csr::hstatus, f.peek(csr::hstatus) | hstatus_bits::VTVM);
    EXPECT_TRUE(is_trap(f.access(kModeVS, csr::satp), Exception::VirtualInstruction));
}

TEST(Csr, ShadowSentinels) {
    // Distinct sentinels from both sides never cross over.
    const uint16_t pairs[][2] = {
        {csr::sscratch, csr::vsscratch}, {csr::sepc, csr::vsepc},   {csr::scause, csr::vscause},
        {csr::stval, csr::vstval},       {csr::stvec, csr::vstvec}, {csr::satp, csr::vsatp},
    };
    for (const auto& p : pairs) {
        Fixture f;
        const reg_t a = p[0] == csr::satp ? atp::make(atp::MODE_SV39, 0x111) : 0x1110;
        const reg_t b = p[0] == csr::satp ? atp::make(atp::MODE_SV39, 0x222) : 0x2220;
        ASSERT_TRUE(f.access(kModeHS, p[0], CsrOp::write, a).ok());
        ASSERT_TRUE(f.access(kModeVS, p[0], CsrOp::write, b).ok());
        EXPECT_EQ(*f.access(kModeHS, p[0]), a) << csr::name(p[0]).value();
        EXPECT_EQ(*f.access(kModeVS, p[0]), b) << csr::name(p[0]).value();
        EXPECT_EQ(*f.access(kModeHS, p[1]), b) << csr::name(p[1]).value();
    }
}

TEST(Csr, SstatusFromVsIsVsstatus) {
    Fixture f;
    ASSERT_TRUE(f.access(kModeVS, csr::sstatus, CsrOp::set, status::SUM).ok());
    EXPECT_TRUE(f.peek(csr::vsstatus) & status::SUM);
    EXPECT_FALSE(f.peek(csr::mstatus) & status::SUM);
}

TEST(Csr, AtpWarlModes) {
    Fixture f;
    f.poke(csr::hgatp, atp::make(atp::MODE_SV39X4, 0x100));
    const reg_t before = f.peek(csr::hgatp);
    for (reg_t mode : {reg_t{1}, reg_t{9}, reg_t{10}, reg_t{15}}) {
        f.poke(csr::hgatp, atp::make(mode, 0x200));
        EXPECT_EQ(f.peek(csr::hgatp), before);
        f.poke(csr::satp, atp::make(mode, 0x200));
        EXPECT_EQ(atp::mode(f.peek(csr::satp)), 0u);
        f.poke(csr::vsatp, atp::make(mode, 0x200));
        EXPECT_EQ(atp::mode(f.peek(csr::vsatp)), 0u);
    }
    f.poke(csr::hgatp, 0);
    EXPECT_EQ(f.peek(csr::hgatp), 0u);
}

TEST(Csr, VgeinRange) {
    Fixture f(2);
    f.poke(csr::hstatus, 2ull << hstatus_bits::VGEIN_SHIFT);
    EXPECT_EQ(f.hart.csrs.vgein(), 2u);
    f.poke(csr::hstatus, 3ull << hstatus_bits::VGEIN_SHIFT);
    EXPECT_EQ(f.hart.csrs.vgein(), 2u);
    f.poke(csr::hstatus, 0);
    EXPECT_EQ(f.hart.csrs.vgein(), 0u);
}

TEST(Csr, HcounterenTmOnly) {
    Fixture f;
    f.poke(csr::hcounteren, ~reg_t{0});
    EXPECT_EQ(f.peek(csr::hcounteren), 2u);
    f.poke(csr::scounteren, ~reg_t{0});
    f.clint.set_mtime(1000);
    f.clint.set_htimedelta(0, static_cast<uint64_t>(-10));
    EXPECT_EQ(*f.access(kModeVS, csr::time), 990u);
    f.poke(csr::hcounteren, 0);
    EXPECT_TRUE(is_trap(f.access(kModeVS, csr::time), Exception::VirtualInstruction));
    EXPECT_EQ(*f.access(kModeHS, csr::time), 1000u);
}

TEST(Csr, HtimedeltaAliasesClint) {
    Fixture f;
    f.poke(csr::htimedelta, 1234);
    EXPECT_EQ(f.clint.htimedelta(0), 1234u);
    ASSERT_TRUE(f.clint.write(Clint::kHtimedelta, 8, 99));
    EXPECT_EQ(f.peek(csr::htimedelta), 99u);
}

TEST(Csr, MidelegForcesVsBits) {
    Fixture f(1);
    f.poke(csr::mideleg, 0);
    EXPECT_EQ(f.peek(csr::mideleg) & irq::VS_BITS, irq::VS_BITS);
    EXPECT_TRUE(f.peek(csr::mideleg) & irq::SGEIP);
    Fixture g(0);
    EXPECT_FALSE(g.peek(csr::mideleg) & irq::SGEIP);
}

TEST(Csr, HedelegNeverDelegableBitsReadZero) {
    Fixture f;
    f.poke(csr::hedeleg, ~reg_t{0});
    const reg_t v = f.peek(csr::hedeleg);
    for (unsigned c : {9u, 10u, 11u, 20u, 21u, 22u, 23u}) EXPECT_FALSE((v >> c) & 1) << c;
    for (unsigned c : {0u, 2u, 3u, 8u, 12u, 13u, 15u}) EXPECT_TRUE((v >> c) & 1) << c;
}

TEST(InterruptView, HvipVssipShowsInVsip) {
    Fixture f;
    f.poke(csr::hideleg, irq::VS_BITS);
    f.poke(csr::hvip, irq::VSSIP);
    EXPECT_TRUE(interrupt_view(f.hart.csrs, InterruptViewKind::vs).pending & irq::SSIP);
    EXPECT_TRUE(*f.access(kModeVS, csr::sip) & irq::SSIP);
}

TEST(InterruptView, EmptyHgeipNoSgeip) {
    for (reg_t hgeie : {reg_t{0}, reg_t{2}, reg_t{6}, ~reg_t{0}}) {
        Fixture f;
        f.poke(csr::hgeie, hgeie);
        EXPECT_FALSE(f.hart.csrs.hip() & irq::SGEIP);
    }
}

TEST(InterruptView, HgeipVgeinEnumeration) {
    for (unsigned geilen = 1; geilen <= 4; ++geilen) {
        const reg_t valid = ((1ull << (geilen + 1)) - 1) & ~1ull;
        for (reg_t lines = 0; lines < (1ull << (geilen + 1)); ++lines)
            for (unsigned vgein = 0; vgein <= geilen; ++vgein)
                for (reg_t hgeie : {reg_t{0}, valid, reg_t{2}}) {
                    Fixture f(geilen);
                    f.hart.csrs.hw.hgeip = lines;
                    f.poke(csr::hgeie, hgeie);
                    f.poke(csr::hstatus, static_cast<reg_t>(vgein) << hstatus_bits::VGEIN_SHIFT);
                    const reg_t hgeip = lines & valid;
                    EXPECT_EQ(f.peek(csr::hgeip), hgeip);
                    const bool vseip = vgein != 0 && ((hgeip >> vgein) & 1);
                    const bool sgeip = (hgeip & hgeie & valid) != 0;
                    const reg_t hip = f.hart.csrs.hip();
                    EXPECT_EQ(bool(hip & irq::VSEIP), vseip) << geilen << " " << lines << " " << vgein;
                    EXPECT_EQ(bool(hip & irq::SGEIP), sgeip);
                }
    }
}

TEST(InterruptView, VsViewRecomputed) {
    std::mt19937_64 rng(3);
    Fixture f;
    for (int i = 0; i < 2000; ++i) {
        f.poke(csr::mie, rng());
        f.poke(csr::hvip, rng());
        f.poke(csr::hideleg, rng());
        f.hart.csrs.hw.vstip = rng() & 1;
        const CsrFile& c = f.hart.csrs;
        const reg_t mip = c.mip();
        EXPECT_EQ(c.vsip(), (mip & c.hideleg & irq::VS_BITS) >> 1);
        EXPECT_EQ(c.vsie(), (c.mie & c.hideleg & irq::VS_BITS) >> 1);
        EXPECT_EQ(c.sip(), mip & c.mideleg() & irq::S_BITS);
        EXPECT_EQ(c.hip(), mip & (irq::VS_BITS | irq::SGEIP));
    }
}

TEST(Csr, WarlIdempotent) {
    std::mt19937_64 rng(11);
    const auto all = implemented_csrs();
    for (int round = 0; round < 20; ++round) {
        Fixture f;
        for (uint16_t a : all) f.poke(a, rng());
        std::vector<reg_t> snap;
        for (uint16_t a : all) snap.push_back(f.peek(a));
        for (uint16_t a : all) {
            f.poke(a, f.peek(a));
            for (size_t k = 0; k < all.size(); ++k)
                ASSERT_EQ(f.peek(all[k]), snap[k])
                    << "writing back " << csr::name(a).value() << " changed " << csr::name(all[k]).value();
        }
    }
}

TEST(Csr, NamesRoundTrip) {
    for (uint16_t a : implemented_csrs()) {
        const auto n = csr::name(a);
        ASSERT_TRUE(n);
        EXPECT_EQ(csr::lookup(*n), a);
    }
}
