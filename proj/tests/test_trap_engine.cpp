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

#include "hvsim/trap_engine.hpp"
#include "oracles.hpp"

using namespace hvsim;

namespace {

const PrivilegeContext kOrigins[] = {kModeU, kModeHS, kModeVU, kModeVS, kModeM};

oracle::Origin origin_of(PrivilegeContext c) { return {static_cast<unsigned>(c.priv), c.virt}; }

TrapTarget from_level(oracle::Level l) {
    switch (l) {
    case oracle::Level::M: return TrapTarget::M;
    case oracle::Level::HS: return TrapTarget::HS;
    case oracle::Level::VS: return TrapTarget::VS;
    }
    return TrapTarget::M;
}

HartState hart_at(PrivilegeContext ctx) {
    HartState h(0, 2);
    h.ctx = ctx;
    h.csrs.mtvec = 0x8000'1000;
    h.csrs.stvec = 0x8000'2000;
    h.csrs.vstvec = 0x8000'3000;
    return h;
}

// Independent model of interrupt selection.
std::optional<unsigned> expected_interrupt(const HartState& h) {
    static const unsigned order[] = {11, 3, 7, 9, 1, 5, 12, 10, 2, 6};
    const CsrFile& c = h.csrs;
    const reg_t ready = c.mip() & c.mie;
    const reg_t mdel = c.mideleg();
    const auto level = [&](unsigned code) {
        const reg_t b = 1ull << code;
        if (!(mdel & b)) return 2;
        if ((c.hideleg & b) && (b & irq::VS_BITS)) return 0;
        return 1;
    };
    const int cur = h.ctx.is_m() ? 2 : h.ctx.virt ? 0 : 1;
    const auto takeable = [&](int lvl) {
        if (lvl == 2) return cur < 2 || bool(c.mstatus & status::MIE);
        if (lvl == 1) return cur < 1 || (cur == 1 && (h.ctx.priv == Priv::U || (c.mstatus & status::SIE)));
        return h.ctx.virt && (h.ctx.priv == Priv::U || (c.vsstatus & status::SIE));
    };
    for (int lvl = 2; lvl >= 0; --lvl) {
        if (!takeable(lvl)) continue;
        for (unsigned code : order)
            if (((ready >> code) & 1) && level(code) == lvl) return code;
    }
    return std::nullopt;
}

void drive_pending(HartState& h, unsigned mask) {
    auto& hw = h.csrs.hw;
    hw.msip = mask & 1;
    hw.mtip = mask & 2;
    hw.meip = mask & 4;
    hw.stip = mask & 8;
    hw.seip = mask & 16;
    hw.vstip = mask & 32;
    h.csrs.mip_sw = (mask & 64) ? irq::SSIP : 0;
    h.csrs.hvip = ((mask & 128) ? irq::VSSIP : 0) | ((mask & 256) ? irq::VSEIP : 0);
    hw.hgeip = (mask & 512) ? 2 : 0;
    h.csrs.hgeie = 2;
}

} // namespace

TEST(ResolveTarget, Examples) {
    CsrFile c;
    c.geilen = 1;
    const auto ecall_u = TrapCause::exception(Exception::EcallFromU);
    EXPECT_EQ(resolve_target(ecall_u, kModeVU, c), TrapTarget::M);
    c.medeleg = 1u << 8;
    EXPECT_EQ(resolve_target(ecall_u, kModeVU, c), TrapTarget::HS);
    c.hedeleg = 1u << 8;
    EXPECT_EQ(resolve_target(ecall_u, kModeVU, c), TrapTarget::VS);
    EXPECT_EQ(resolve_target(ecall_u, kModeU, c), TrapTarget::HS);
    EXPECT_EQ(resolve_target(ecall_u, kModeM, c), TrapTarget::M);

    // Guest page faults never reach VS even with every bit set.
    c.medeleg = c.hedeleg = ~reg_t{0};
    for (Exception e : {Exception::LoadGuestPageFault, Exception::InstructionGuestPageFault,
                        Exception::StoreAmoGuestPageFault, Exception::VirtualInstruction, Exception::EcallFromVS})
        EXPECT_EQ(resolve_target(TrapCause::exception(e), kModeVS, c), TrapTarget::HS);

    const auto vsti = TrapCause::interrupt(Interrupt::VirtualSupervisorTimer);
    EXPECT_EQ(resolve_target(vsti, kModeVS, c), TrapTarget::HS);
    c.hideleg = irq::VSTIP;
    EXPECT_EQ(resolve_target(vsti, kModeVS, c), TrapTarget::VS);
    EXPECT_EQ(resolve_target(TrapCause::interrupt(Interrupt::MachineTimer), kModeVS, c), TrapTarget::M);
}

TEST(ResolveTarget, MatchesOracleExhaustively) {
    std::mt19937_64 rng(5);
    for (unsigned cause = 0; cause < 24; ++cause)
        for (int med = 0; med < 2; ++med)
            for (int hed = 0; hed < 2; ++hed)
                for (PrivilegeContext o : kOrigins)
                    for (int k = 0; k < 8; ++k) {
                        CsrFile c;
                        const reg_t noise_m = rng() & ~(1ull << cause);
                        const reg_t noise_h = rng() & ~(1ull << cause);
                        c.medeleg = noise_m | (med ? 1ull << cause : 0);
                        c.hedeleg = noise_h | (hed ? 1ull << cause : 0);
                        const auto want = oracle::exception_target(cause, c.medeleg, c.hedeleg, origin_of(o));
                        EXPECT_EQ(resolve_target(TrapCause{false, static_cast<uint8_t>(cause)}, o, c),
                                  from_level(want))
                            << "cause " << cause << " from " << mode_name(o);
                    }
    for (unsigned code : {1u, 2u, 3u, 5u, 6u, 7u, 9u, 10u, 11u, 12u})
        for (int k = 0; k < 64; ++k)
            for (PrivilegeContext o : kOrigins) {
                CsrFile c;
                c.geilen = 2;
                c.mideleg_sw = rng();
                c.hideleg = rng() & irq::VS_BITS;
                const auto want = oracle::interrupt_target(code, c.mideleg(), c.hideleg, origin_of(o));
                EXPECT_EQ(resolve_target(TrapCause{true, static_cast<uint8_t>(code)}, o, c), from_level(want));
            }
}

TEST(TakeTrap, GuestLoadFaultToHs) {
    HartState h = hart_at(kModeVS);
    TrapInfo info = TrapInfo::of(Exception::LoadGuestPageFault, 0x1234);
    info.pc = 0x8000'0100;
    info.gpa = 0x4'0000;
    info.gva = true;
    take_trap(h, info, TrapTarget::HS);
    EXPECT_EQ(h.csrs.sepc, 0x8000'0100u);
    EXPECT_EQ(h.csrs.scause, 21u);
    EXPECT_EQ(h.csrs.stval, 0x1234u);
    EXPECT_EQ(h.csrs.htval, 0x1'0000u);
    EXPECT_EQ(h.csrs.htinst, 0u);
    EXPECT_TRUE(h.csrs.hstatus & hstatus_bits::SPV);
    EXPECT_TRUE(h.csrs.hstatus & hstatus_bits::SPVP);
    EXPECT_TRUE(h.csrs.hstatus & hstatus_bits::GVA);
    EXPECT_TRUE(h.csrs.mstatus & status::SPP);
    EXPECT_EQ(h.ctx, kModeHS);
    EXPECT_EQ(h.pc, 0x8000'2000u);
}

TEST(TakeTrap, GuestFaultToM) {
    HartState h = hart_at(kModeVU);
    TrapInfo info = TrapInfo::of(Exception::StoreAmoGuestPageFault, 0x10);
    info.pc = 0x8000'0200;
    info.gpa = 0x123'4567'8000;
    take_trap(h, info, TrapTarget::M);
    EXPECT_EQ(h.csrs.mtval2, 0x123'4567'8000ull >> 2);
    EXPECT_EQ(h.csrs.mcause, 23u);
    EXPECT_TRUE(h.csrs.mstatus & status::MPV);
    EXPECT_EQ((h.csrs.mstatus & status::MPP) >> status::MPP_SHIFT, 0u);
    EXPECT_EQ(h.ctx, kModeM);
}

TEST(TakeTrap, EcallFromMStaysInM) {
    HartState h = hart_at(kModeM);
    h.csrs.mstatus |= status::MIE | status::MPV;
    TrapInfo info = TrapInfo::of(Exception::EcallFromM);
    info.pc = 0x8000'0000;
    take_trap(h, info, TrapTarget::M);
    EXPECT_FALSE(h.csrs.mstatus & status::MPV);
    EXPECT_EQ((h.csrs.mstatus & status::MPP) >> status::MPP_SHIFT, 3u);
    EXPECT_TRUE(h.csrs.mstatus & status::MPIE);
    EXPECT_FALSE(h.csrs.mstatus & status::MIE);
    EXPECT_EQ(h.csrs.mcause, 11u);
}

TEST(TakeTrap, VsTimerUsesSupervisorCode) {
    HartState h = hart_at(kModeVU);
    h.csrs.hideleg = irq::VS_BITS;
    const auto cause = TrapCause::interrupt(Interrupt::VirtualSupervisorTimer);
    ASSERT_EQ(resolve_target(cause, h.ctx, h.csrs), TrapTarget::VS);
    TrapInfo info{cause, 0, std::nullopt, 0x4000, false};
    take_trap(h, info, TrapTarget::VS);
    EXPECT_EQ(h.csrs.vscause, (1ull << 63) | 5);
    EXPECT_EQ(h.csrs.vsepc, 0x4000u);
    EXPECT_FALSE(h.csrs.vsstatus & status::SPP);
    EXPECT_EQ(h.ctx, kModeVS);
    EXPECT_EQ(h.pc, 0x8000'3000u);
    EXPECT_EQ(h.csrs.scause, 0u);
    EXPECT_EQ(h.csrs.mcause, 0u);
}

TEST(TakeTrap, GpaChannelOnlyForGuestFaults) {
    std::mt19937_64 rng(9);
    for (unsigned cause = 0; cause < 24; ++cause)
        for (TrapTarget t : {TrapTarget::M, TrapTarget::HS}) {
            HartState h = hart_at(kModeVS);
            h.csrs.htval = h.csrs.mtval2 = 0xdead;
            const TrapCause tc{false, static_cast<uint8_t>(cause)};
            TrapInfo info{tc, rng(), std::nullopt, 0x100, false};
            if (tc.is_guest_page_fault()) info.gpa = rng() & ((1ull << 41) - 1);
            take_trap(h, info, t);
            const reg_t want = info.gpa ? *info.gpa >> 2 : 0;
            EXPECT_EQ(t == TrapTarget::M ? h.csrs.mtval2 : h.csrs.htval, want) << cause;
        }
}

TEST(TakeTrap, TrapThenReturnRestoresContext) {
    std::mt19937_64 rng(21);
    for (PrivilegeContext o : {kModeU, kModeHS, kModeVU, kModeVS, kModeM})
        for (TrapTarget t : {TrapTarget::M, TrapTarget::HS, TrapTarget::VS}) {
            // Only raise to equal or higher privilege.
            if (o.is_m() && t != TrapTarget::M) continue;
            if (t == TrapTarget::VS && !o.virt) continue;
            for (int k = 0; k < 16; ++k) {
                HartState h = hart_at(o);
                h.csrs.mstatus = (h.csrs.mstatus & ~(status::MIE | status::SIE)) | (rng() & (status::MIE | status::SIE));
                h.csrs.vsstatus = (h.csrs.vsstatus & ~status::SIE) | (rng() & status::SIE);
                const reg_t ms = h.csrs.mstatus, vs = h.csrs.vsstatus;
                const addr_t pc = (rng() & 0xFFFF'FFFC) | 0x8000'0000;
                TrapInfo info = TrapInfo::of(Exception::Breakpoint);
                info.pc = pc;
                take_trap(h, info, t);
                ASSERT_EQ(h.ctx, target_context(t));
                ASSERT_FALSE(execute_xret(h, t == TrapTarget::M ? XretKind::mret : XretKind::sret));
                EXPECT_EQ(h.ctx, o);
                EXPECT_EQ(h.pc, pc);
                if (t == TrapTarget::M) EXPECT_EQ(h.csrs.mstatus & status::MIE, ms & status::MIE);
                if (t == TrapTarget::HS) EXPECT_EQ(h.csrs.mstatus & status::SIE, ms & status::SIE);
                if (t == TrapTarget::VS) EXPECT_EQ(h.csrs.vsstatus & status::SIE, vs & status::SIE);
            }
        }
}

TEST(Xret, SretFromHsIntoGuest) {
    HartState h = hart_at(kModeHS);
    h.csrs.hstatus |= hstatus_bits::SPV;
    h.csrs.mstatus |= status::SPP | status::SPIE;
    h.csrs.sepc = 0x8020'0000;
    ASSERT_FALSE(execute_xret(h, XretKind::sret));
    EXPECT_EQ(h.ctx, kModeVS);
    EXPECT_EQ(h.pc, 0x8020'0000u);
    EXPECT_TRUE(h.csrs.mstatus & status::SIE);
    EXPECT_FALSE(h.csrs.mstatus & status::SPP);
}

TEST(Xret, MretWithMpv) {
    HartState h = hart_at(kModeM);
    h.csrs.mstatus = (h.csrs.mstatus & ~status::MPP) | (1ull << status::MPP_SHIFT) | status::MPV | status::MPRV;
    h.csrs.mepc = 0x9000;
    ASSERT_FALSE(execute_xret(h, XretKind::mret));
    EXPECT_EQ(h.ctx, kModeVS);
    EXPECT_FALSE(h.csrs.mstatus & status::MPV);
    EXPECT_FALSE(h.csrs.mstatus & status::MPRV);
    EXPECT_EQ(h.pc, 0x9000u);
}

TEST(Xret, PrivilegeFaults) {
    {
        HartState h = hart_at(kModeHS);
        auto t = execute_xret(h, XretKind::mret);
        ASSERT_TRUE(t);
        EXPECT_TRUE(t->cause.is(Exception::IllegalInstruction));
    }
    {
        HartState h = hart_at(kModeHS);
        h.csrs.mstatus |= status::TSR;
        auto t = execute_xret(h, XretKind::sret);
        ASSERT_TRUE(t);
        EXPECT_TRUE(t->cause.is(Exception::IllegalInstruction));
    }
    {
        HartState h = hart_at(kModeVS);
        h.csrs.hstatus |= hstatus_bits::VTSR;
        auto t = execute_xret(h, XretKind::sret);
        ASSERT_TRUE(t);
        EXPECT_TRUE(t->cause.is(Exception::VirtualInstruction));
    }
    {
        HartState h = hart_at(kModeVU);
        auto t = execute_xret(h, XretKind::sret);
        ASSERT_TRUE(t);
        EXPECT_TRUE(t->cause.is(Exception::VirtualInstruction));
    }
    {
        HartState h = hart_at(kModeU);
        auto t = execute_xret(h, XretKind::sret);
        ASSERT_TRUE(t);
        EXPECT_TRUE(t->cause.is(Exception::IllegalInstruction));
    }
    {
        // TSR does not affect VS.
        HartState h = hart_at(kModeVS);
        h.csrs.mstatus |= status::TSR;
        EXPECT_FALSE(execute_xret(h, XretKind::sret));
    }
}

TEST(PickInterrupt, NothingWhenMieClear) {
    for (PrivilegeContext o : kOrigins)
        for (unsigned mask = 0; mask < 1024; ++mask) {
            HartState h = hart_at(o);
            h.csrs.mstatus |= status::MIE | status::SIE;
            h.csrs.vsstatus |= status::SIE;
            h.csrs.hideleg = irq::VS_BITS;
            drive_pending(h, mask);
            EXPECT_FALSE(pick_interrupt(h));
            EXPECT_FALSE(wake_condition(h));
        }
}

TEST(PickInterrupt, MatchesModel) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 20000; ++i) {
        HartState h = hart_at(kOrigins[rng() % 5]);
        drive_pending(h, static_cast<unsigned>(rng() & 1023));
        h.csrs.mie = rng() & irq::ALL;
        h.csrs.mideleg_sw = rng();
        h.csrs.hideleg = rng() & irq::VS_BITS;
        h.csrs.mstatus = (h.csrs.mstatus & ~(status::MIE | status::SIE)) | (rng() & (status::MIE | status::SIE));
        h.csrs.vsstatus = (h.csrs.vsstatus & ~status::SIE) | (rng() & status::SIE);
        const auto got = pick_interrupt(h);
        const auto want = expected_interrupt(h);
        ASSERT_EQ(got.has_value(), want.has_value()) << i;
        if (got) {
            EXPECT_TRUE(got->is_interrupt);
            EXPECT_EQ(got->code, *want) << i;
        }
        // Whatever is picked must be routed at or above the current level.
        if (got) {
            const TrapTarget t = resolve_target(*got, h.ctx, h.csrs);
            if (h.ctx.is_m()) EXPECT_EQ(t, TrapTarget::M);
            if (!h.ctx.virt) EXPECT_NE(t, TrapTarget::VS);
        }
    }
}

TEST(PickInterrupt, FixedOrder) {
    HartState h = hart_at(kModeU);
    h.csrs.mie = irq::ALL;
    drive_pending(h, 1023);
    h.csrs.mideleg_sw = 0;
    EXPECT_EQ(pick_interrupt(h)->code, 11);
    h.csrs.hw.meip = false;
    EXPECT_EQ(pick_interrupt(h)->code, 3);
    h.csrs.hw.msip = false;
    EXPECT_EQ(pick_interrupt(h)->code, 7);
    h.csrs.hw.mtip = false;
    EXPECT_EQ(pick_interrupt(h)->code, 9);
}

TEST(PickInterrupt, MonotoneInEnables) {
    // Adding an enable bit never turns a taken interrupt into none.
    std::mt19937_64 rng(13);
    for (int i = 0; i < 5000; ++i) {
        HartState h = hart_at(kOrigins[rng() % 5]);
        drive_pending(h, static_cast<unsigned>(rng() & 1023));
        h.csrs.mie = rng() & irq::ALL;
        h.csrs.mideleg_sw = rng();
        h.csrs.hideleg = rng() & irq::VS_BITS;
        h.csrs.mstatus |= rng() & (status::MIE | status::SIE);
        const bool before = pick_interrupt(h).has_value();
        h.csrs.mie |= 1ull << (rng() % 13);
        h.csrs.mie &= irq::ALL;
        if (before) EXPECT_TRUE(pick_interrupt(h).has_value());
    }
}
