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

#include <set>
#include <sstream>

#include "hvsim/conformance.hpp"
#include "hvsim/harness.hpp"

using namespace hvsim;

namespace {

constexpr addr_t kVa = 0x1000'0000;
constexpr addr_t kGpa = 0x4000'0000;

Mapping both(addr_t pa, uint8_t s1, uint8_t s2) {
    Mapping m;
    m.va = kVa;
    m.gpa = kGpa;
    m.pa = pa;
    m.s1 = s1;
    m.s2 = s2;
    return m;
}

std::vector<TrapRecord> scripted(Harness& h) {
    h.set_csr(csr::medeleg, 1u << 10);
    h.goto_priv(kModeVS);
    h.exec(rv::csrr(5, csr::hgatp));
    h.exec(rv::fixed(Op::ecall));
    h.goto_priv(kModeVU);
    h.exec(rv::fixed(Op::ecall));
    return h.traps();
}

} // namespace

TEST(HarnessReset, SameUnitTwiceSameTraps) {
    Harness h;
    const auto first = scripted(h);
    const uint64_t d1 = h.trace_digest();
    h.reset();
    EXPECT_TRUE(h.traps().empty());
    const auto second = scripted(h);
    EXPECT_EQ(first, second);
    EXPECT_EQ(h.trace_digest(), d1);
    EXPECT_EQ(first.size(), 3u);
}

TEST(HarnessReset, ClearsHgatp) {
    Harness h;
    h.enable_stage2();
    EXPECT_NE(h.csr(csr::hgatp), 0u);
    h.reset();
    EXPECT_EQ(h.csr(csr::hgatp), 0u);
    EXPECT_EQ(h.mode(), kModeM);
}

TEST(HarnessReset, ReopensGateways) {
    Harness h;
    Plic& p = h.bus().plic;
    const unsigned s = p.context_index(0, Plic::ContextKind::S);
    p.set_priority(5, 1);
    p.set_enable(s, 5, true);
    p.set_source_level(5, true);
    ASSERT_EQ(p.claim(s), 5u);
    ASSERT_TRUE(p.source_claimed(5));
    h.reset();
    EXPECT_FALSE(p.source_claimed(5));
    p.set_priority(5, 1);
    p.set_enable(s, 5, true);
    p.set_source_level(5, true);
    EXPECT_TRUE(p.context_line(s));
}

TEST(GotoPriv, Probes) {
    Harness h;
    h.goto_priv(kModeVS);
    EXPECT_EQ(h.mode(), kModeVS);
    auto t = h.exec(rv::csrr(5, csr::hgatp));
    ASSERT_TRUE(t);
    EXPECT_TRUE(t->cause.is(Exception::VirtualInstruction));
    EXPECT_EQ(t->origin, kModeVS);
    EXPECT_EQ(h.mode(), kModeVS); // recovered back into the guest

    h.goto_priv(kModeHS);
    EXPECT_FALSE(h.exec(rv::csrr(5, csr::hgatp)));

    h.set_csr(csr::medeleg, 1u << 8);
    h.goto_priv(kModeVU);
    t = h.exec(rv::fixed(Op::ecall));
    ASSERT_TRUE(t);
    EXPECT_TRUE(t->cause.is(Exception::EcallFromU));
    EXPECT_EQ(t->origin, kModeVU);
    EXPECT_EQ(t->target, kModeHS);
    h.set_csr(csr::hedeleg, 1u << 8);
    t = h.exec(rv::fixed(Op::ecall));
    EXPECT_EQ(t->target, kModeVS);
    EXPECT_EQ(h.mode(), kModeVU);
}

TEST(GotoPriv, EveryMode) {
    Harness h;
    for (PrivilegeContext c : {kModeVU, kModeM, kModeU, kModeVS, kModeHS, kModeVU}) {
        h.goto_priv(c);
        EXPECT_EQ(h.mode(), c);
    }
    EXPECT_THROW(h.goto_priv(PrivilegeContext{Priv::M, true}), ScenarioError);
}

TEST(Map, Stage1CheckedFirst) {
    Harness h;
    h.set_csr(csr::medeleg, ~reg_t{0});
    h.map(both(h.data_base(), kRO, kRW | pte::U));
    h.goto_priv(kModeVS);
    const Access a = h.store(kVa, 1);
    ASSERT_TRUE(a.trap);
    EXPECT_TRUE(a.trap->cause.is(Exception::StoreAmoPageFault));
    EXPECT_FALSE(a.trap->gpa);
}

TEST(Map, FullPermissionsSucceed) {
    Harness h;
    h.map(both(h.data_base(), kRWX, kRWX | pte::U));
    h.goto_priv(kModeVS);
    ASSERT_TRUE(h.store(kVa + 16, 0xABCD).ok());
    EXPECT_EQ(h.load(kVa + 16).value, 0xABCDu);
    EXPECT_EQ(h.read_phys(h.data_base() + 16), 0xABCDu);
}

TEST(Map, Stage2ReadOnlyStore) {
    Harness h;
    h.set_csr(csr::medeleg, ~reg_t{0});
    h.map(both(h.data_base(), kRW, kRO | pte::U));
    h.goto_priv(kModeVS);
    const Access a = h.store(kVa + 8, 1);
    ASSERT_TRUE(a.trap);
    EXPECT_TRUE(a.trap->cause.is(Exception::StoreAmoGuestPageFault));
    EXPECT_EQ(a.trap->gpa, kGpa + 8);
    EXPECT_EQ(a.trap->tval2, (kGpa + 8) >> 2);
    EXPECT_EQ(a.trap->tval, kVa + 8);
    EXPECT_TRUE(a.trap->gva);
}

TEST(Map, SuperpagesAndBareStages) {
    Harness h;
    Mapping m;
    m.va = 0x4000'0000;
    m.gpa = 0xC000'0000;
    m.pa = h.machine().config().map.ram_base;
    m.s1 = kRW;
    m.s2 = kRW | pte::U;
    m.s1_level = 2;
    m.s2_level = 1;
    h.map(m);
    h.goto_priv(kModeVS);
    const Access st = h.store(0x4000'0000 + 0x1234'0, 9); // inside the 2 MiB stage-2 page
    ASSERT_TRUE(st.ok()) << st.trap->to_string();
    EXPECT_EQ(h.read_phys(m.pa + 0x1234'0), 9u);
    // Outside the stage-2 superpage the guest faults.
    EXPECT_FALSE(h.load(0x4000'0000 + 0x20'0000).ok());

    Harness g;
    Mapping s2only;
    s2only.va = 0x2000'0000; // used as the gpa
    s2only.pa = g.data_base();
    s2only.s2 = kRW | pte::U;
    s2only.stage1 = false;
    g.map(s2only);
    EXPECT_EQ(g.csr(csr::vsatp), 0u);
    g.goto_priv(kModeVS);
    const Access gs = g.store(0x2000'0008, 4);
    ASSERT_TRUE(gs.ok()) << gs.trap->to_string();
    EXPECT_EQ(g.read_phys(g.data_base() + 8), 4u);
}

TEST(Map, ConflictingMappingRejected) {
    Harness h;
    h.map(both(h.data_base(), kRW, kRW | pte::U));
    Mapping m = both(h.data_base(), kRW, kRW | pte::U);
    m.s1_level = 1; // a 2 MiB leaf where a table already exists
    EXPECT_THROW(h.map(m), ScenarioError);
}

TEST(Encode, Examples) {
    EXPECT_EQ(encode(rv::addi(1, 0, 5)), 0x00500093u);
    EXPECT_EQ(*decode(encode(rv::addi(1, 0, 5))), rv::addi(1, 0, 5));
    const Instruction hlv = rv::hlv(Op::hlv_w, 3, 4);
    const uint32_t w = encode(hlv);
    EXPECT_EQ(w >> 25, 0x34u);
    EXPECT_EQ((w >> 20) & 31, 0u);
    EXPECT_EQ(*decode(w), hlv);
}

TEST(Encode, SatpFromVsScenario) {
    Harness h;
    h.goto_priv(kModeVS);
    const reg_t v = atp::make(atp::MODE_SV39, 0x8'0042);
    h.set_reg(7, v);
    EXPECT_FALSE(h.exec(rv::csrw(csr::satp, 7)));
    EXPECT_EQ(h.csr(csr::vsatp), v);
    EXPECT_EQ(h.csr(csr::satp), 0u);
}

TEST(Assembler, LabelsAndConstants) {
    Assembler a(0x8000'0000);
    a.li(5, 0x1234'5678'9ABC'DEF0);
    a.branch_to(Op::beq, 0, 0, "end");
    a.emit(rv::addi(6, 0, 1));
    a.label("end");
    a.la(7, "end");
    const auto bytes = a.finish();
    MachineConfig c;
    c.map.ram_size = 1 << 20;
    Machine m(c);
    m.bus().load_image(bytes, 0x8000'0000);
    const uint64_t n = bytes.size() / 4;
    for (uint64_t i = 0; i < n - 1 && m.hart(0).pc < 0x8000'0000 + bytes.size(); ++i) m.step(0);
    EXPECT_EQ(m.hart(0).x[5], 0x1234'5678'9ABC'DEF0u);
    EXPECT_EQ(m.hart(0).x[6], 0u);
    EXPECT_EQ(m.hart(0).x[7], a.address_of("end"));
    EXPECT_THROW(Assembler(0).address_of("nope"), std::exception);
}

TEST(Suite, PermutationIsolation) {
    SuiteOptions fwd, rev;
    rev.reverse = true;
    const SuiteReport a = run_suite(fwd);
    const SuiteReport b = run_suite(rev);
    ASSERT_EQ(a.results.size(), b.results.size());
    for (const auto& r : a.results) {
        const UnitResult* o = b.find(r.name);
        ASSERT_NE(o, nullptr) << r.name;
        EXPECT_EQ(r.passed, o->passed) << r.name;
        EXPECT_EQ(r.traps, o->traps) << r.name;
        EXPECT_EQ(r.digest, o->digest) << r.name;
    }
    EXPECT_TRUE(a.ok());
}

TEST(Suite, HlvxMutationCaught) {
    SuiteOptions o;
    o.filter = "hlv";
    o.mutations = static_cast<MutationSet>(Mutation::hlvx_exec);
    const SuiteReport r = run_suite(o);
    const UnitResult* u = r.find("hlv.hlvx_execute_only");
    ASSERT_NE(u, nullptr);
    EXPECT_FALSE(u->passed);
    o.mutations = 0;
    EXPECT_TRUE(run_suite(o).find("hlv.hlvx_execute_only")->passed);
}

TEST(Suite, EveryMutationNamed) {
    std::set<std::string> names;
    for (Mutation m : all_mutations()) {
        const std::string n = mutation_name(m);
        EXPECT_EQ(mutation_from_name(n), m);
        names.insert(n);
    }
    EXPECT_EQ(names.size(), all_mutations().size());
    EXPECT_FALSE(mutation_from_name("bogus"));
}

TEST(Suite, FilterAndReports) {
    SuiteOptions o;
    o.filter = "CLINT";
    const SuiteReport r = run_suite(o);
    ASSERT_FALSE(r.results.empty());
    for (const auto& u : r.results) EXPECT_EQ(u.feature, Feature::clint) << u.name;
    std::ostringstream junit, matrix;
    print_junit(junit, r);
    print_feature_matrix(matrix, r);
    EXPECT_NE(junit.str().find("<testsuite"), std::string::npos);
    EXPECT_NE(junit.str().find(r.results[0].name), std::string::npos);
    EXPECT_NE(matrix.str().find("CLINT"), std::string::npos);
}

TEST(Suite, FeatureTableComplete) {
    const auto& t = feature_table();
    EXPECT_EQ(t.size(), static_cast<size_t>(Feature::count_));
    for (size_t i = 0; i < t.size(); ++i) EXPECT_EQ(static_cast<size_t>(t[i].feature), i);
}
