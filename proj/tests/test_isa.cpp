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

#include "hvsim/harness.hpp"
#include "hvsim/isa.hpp"

using namespace hvsim;

namespace {

// Random operands that fit the op's format.
Instruction random_operands(Op op, std::mt19937_64& rng) {
    auto r = [&](uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(rng); };
    auto simm = [&](int bits) {
        return static_cast<int64_t>(r(1ull << bits)) - (1ll << (bits - 1));
    };
    Instruction in;
    in.op = op;
    switch (op_info(op).format) {
    case Format::R:
        in.rd = r(32), in.rs1 = r(32), in.rs2 = r(32);
        break;
    case Format::I:
        in.rd = r(32), in.rs1 = r(32), in.imm = simm(12);
        break;
    case Format::S:
        in.rs1 = r(32), in.rs2 = r(32), in.imm = simm(12);
        break;
    case Format::B:
        in.rs1 = r(32), in.rs2 = r(32), in.imm = simm(13) & ~1ll;
        break;
    case Format::U:
        in.rd = r(32), in.imm = simm(32) & ~0xFFFll;
        break;
    case Format::J:
        in.rd = r(32), in.imm = simm(21) & ~1ll;
        break;
    case Format::Shift:
        in.rd = r(32), in.rs1 = r(32), in.imm = static_cast<int64_t>(r(64));
        break;
    case Format::ShiftW:
        in.rd = r(32), in.rs1 = r(32), in.imm = static_cast<int64_t>(r(32));
        break;
    case Format::Amo:
        in.rd = r(32), in.rs1 = r(32), in.rs2 = r(32), in.aqrl = r(4);
        break;
    case Format::Lr:
        in.rd = r(32), in.rs1 = r(32), in.aqrl = r(4);
        break;
    case Format::Csr:
        in.rd = r(32), in.rs1 = r(32), in.imm = static_cast<int64_t>(r(4096));
        break;
    case Format::CsrI:
        in.rd = r(32), in.rs1 = r(32), in.imm = static_cast<int64_t>(r(4096));
        break;
    case Format::Fence:
        in.imm = static_cast<int64_t>(r(256));
        break;
    case Format::Fixed:
        break;
    case Format::Fence2:
        in.rs1 = r(32), in.rs2 = r(32);
        break;
    case Format::Hlv:
        in.rd = r(32), in.rs1 = r(32);
        break;
    case Format::Hsv:
        in.rs1 = r(32), in.rs2 = r(32);
        break;
    }
    return in;
}

} // namespace

TEST(Decode, EcallCanonical) {
    const auto in = decode(0x0000'0073);
    ASSERT_TRUE(in);
    EXPECT_EQ(in->op, Op::ecall);
}

TEST(Decode, HfenceGvmaAll) {
    // funct7 0110001, rs2 = rs1 = x0.
    const auto in = decode(0x6200'0073);
    ASSERT_TRUE(in);
    EXPECT_EQ(in->op, Op::hfence_gvma);
    EXPECT_EQ(in->rs1, 0);
    EXPECT_EQ(in->rs2, 0);
    const auto vv = decode(0x2200'0073);
    ASSERT_TRUE(vv);
    EXPECT_EQ(vv->op, Op::hfence_vvma);
}

TEST(Decode, KnownWords) {
    EXPECT_EQ(decode(0x0050'0093)->op, Op::addi); // addi x1, x0, 5
    EXPECT_EQ(decode(0x1050'0073)->op, Op::wfi);
    EXPECT_EQ(decode(0x3020'0073)->op, Op::mret);
    EXPECT_EQ(decode(0x1020'0073)->op, Op::sret);
    EXPECT_EQ(decode(0x0010'0073)->op, Op::ebreak);
}

TEST(Decode, IllegalWords) {
    EXPECT_FALSE(decode(0x0000'0000));
    EXPECT_FALSE(decode(0xFFFF'FFFF));
    EXPECT_FALSE(decode(0x0000'0001)); // compressed quadrant
}

TEST(Decode, TotalityFuzz) {
    std::mt19937 rng(1);
    size_t legal = 0;
    for (int i = 0; i < 1'000'000; ++i) {
        const uint32_t w = rng();
        std::optional<Instruction> in;
        ASSERT_NO_THROW(in = decode(w));
        if (!in) continue;
        ++legal;
        // A decoded word re-encodes to something decoding to the same instruction.
        const auto again = try_encode(*in);
        ASSERT_TRUE(again) << std::hex << w;
        const auto back = decode(*again);
        ASSERT_TRUE(back);
        EXPECT_EQ(*back, *in) << std::hex << w;
    }
    EXPECT_GT(legal, 1000u);
}

TEST(Encode, RoundTripEveryOp) {
    std::mt19937_64 rng(7);
    for (const OpInfo& info : op_table()) {
        for (int k = 0; k < 200; ++k) {
            const Instruction in = random_operands(info.op, rng);
            const auto word = try_encode(in);
            ASSERT_TRUE(word) << info.name;
            EXPECT_EQ((*word & info.mask), info.match) << info.name;
            const auto back = decode(*word);
            ASSERT_TRUE(back) << info.name << " " << std::hex << *word;
            EXPECT_EQ(*back, in) << info.name;
            EXPECT_EQ(back->raw, *word);
        }
    }
}

TEST(Encode, AddiExample) {
    const uint32_t w = encode(rv::addi(1, 0, 5));
    EXPECT_EQ(w, 0x0050'0093u);
    EXPECT_EQ(*decode(w), rv::addi(1, 0, 5));
}

TEST(Encode, HlvWordFields) {
    const uint32_t w = encode(rv::hlv(Op::hlv_w, 3, 4));
    EXPECT_EQ(w >> 25, 0x34u);       // funct7
    EXPECT_EQ((w >> 20) & 31, 0u);   // rs2 selects the plain (non-hlvx) form
    EXPECT_EQ((w >> 15) & 31, 4u);
    EXPECT_EQ((w >> 12) & 7, 4u);
    EXPECT_EQ((w >> 7) & 31, 3u);
    EXPECT_EQ(w & 0x7F, 0x73u);
    EXPECT_EQ(*decode(w), rv::hlv(Op::hlv_w, 3, 4));
    const uint32_t x = encode(rv::hlv(Op::hlvx_wu, 3, 4));
    EXPECT_EQ((x >> 20) & 31, 3u);
}

TEST(Encode, RejectsOutOfRange) {
    EXPECT_FALSE(try_encode(rv::addi(1, 0, 5000)));
    EXPECT_FALSE(try_encode(rv::i(Op::slli, 1, 1, 64)));
    EXPECT_FALSE(try_encode(rv::i(Op::slliw, 1, 1, 32)));
    Instruction odd = rv::s(Op::beq, 1, 2, 3);
    EXPECT_FALSE(try_encode(odd));
    EXPECT_THROW(encode(rv::addi(40, 0, 0)), std::invalid_argument);
}

TEST(Names, TableIsConsistent) {
    EXPECT_EQ(op_table().size(), kOpCount);
    for (const OpInfo& info : op_table()) {
        EXPECT_EQ(op_from_name(info.name), info.op);
        EXPECT_EQ(op_name(info.op), info.name);
    }
    EXPECT_FALSE(op_from_name("hfence.hvma"));
    EXPECT_EQ(disassemble(rv::addi(1, 0, 5)).rfind("addi", 0), 0u);
}
