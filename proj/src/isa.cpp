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

#include "hvsim/isa.hpp"

#include <array>
#include <stdexcept>

#include "hvsim/csr.hpp"

namespace hvsim {

namespace {

constexpr uint32_t kOpc = 0x7F;
constexpr uint32_t kF3 = 0x7000;
constexpr uint32_t kF7 = 0xFE000000;
constexpr uint32_t kRd = 0xF80;
constexpr uint32_t kRs2 = 0x1F00000;

constexpr OpInfo r(Op op, std::string_view n, uint32_t opc, uint32_t f3, uint32_t f7) {
    return {op, n, Format::R, opc | f3 << 12 | f7 << 25, kOpc | kF3 | kF7};
}
constexpr OpInfo i(Op op, std::string_view n, uint32_t opc, uint32_t f3) {
    return {op, n, Format::I, opc | f3 << 12, kOpc | kF3};
}
constexpr OpInfo s(Op op, std::string_view n, uint32_t opc, uint32_t f3, Format f = Format::S) {
    return {op, n, f, opc | f3 << 12, kOpc | kF3};
}
constexpr OpInfo u(Op op, std::string_view n, uint32_t opc, Format f = Format::U) {
    return {op, n, f, opc, kOpc};
}
constexpr OpInfo sh(Op op, std::string_view n, uint32_t opc, uint32_t f3, uint32_t f6) {
    return {op, n, Format::Shift, opc | f3 << 12 | f6 << 26, kOpc | kF3 | 0xFC000000};
}
constexpr OpInfo shw(Op op, std::string_view n, uint32_t opc, uint32_t f3, uint32_t f7) {
    return {op, n, Format::ShiftW, opc | f3 << 12 | f7 << 25, kOpc | kF3 | kF7};
}
constexpr OpInfo amo(Op op, std::string_view n, uint32_t f3, uint32_t f5) {
    return {op, n, Format::Amo, 0x2F | f3 << 12 | f5 << 27, kOpc | kF3 | 0xF8000000};
}
constexpr OpInfo lr(Op op, std::string_view n, uint32_t f3) {
    return {op, n, Format::Lr, 0x2F | f3 << 12 | 0x02u << 27, kOpc | kF3 | 0xF8000000 | kRs2};
}
constexpr OpInfo fixed(Op op, std::string_view n, uint32_t word) {
    return {op, n, Format::Fixed, word, 0xFFFFFFFF};
}
constexpr OpInfo f2(Op op, std::string_view n, uint32_t f7) {
    return {op, n, Format::Fence2, 0x73 | f7 << 25, kOpc | kF3 | kF7 | kRd};
}
constexpr OpInfo csr_op(Op op, std::string_view n, uint32_t f3, Format f) {
    return {op, n, f, 0x73 | f3 << 12, kOpc | kF3};
}
constexpr OpInfo hlv(Op op, std::string_view n, uint32_t f7, uint32_t rs2) {
    return {op, n, Format::Hlv, 0x73 | 4u << 12 | rs2 << 20 | f7 << 25, kOpc | kF3 | kF7 | kRs2};
}
constexpr OpInfo hsv(Op op, std::string_view n, uint32_t f7) {
    return {op, n, Format::Hsv, 0x73 | 4u << 12 | f7 << 25, kOpc | kF3 | kF7 | kRd};
}

// Indexed by Op.
constexpr std::array<OpInfo, kOpCount> kTable{{
    u(Op::lui, "lui", 0x37),
    u(Op::auipc, "auipc", 0x17),
    u(Op::jal, "jal", 0x6F, Format::J),
    i(Op::jalr, "jalr", 0x67, 0),
    s(Op::beq, "beq", 0x63, 0, Format::B),
    s(Op::bne, "bne", 0x63, 1, Format::B),
    s(Op::blt, "blt", 0x63, 4, Format::B),
    s(Op::bge, "bge", 0x63, 5, Format::B),
    s(Op::bltu, "bltu", 0x63, 6, Format::B),
    s(Op::bgeu, "bgeu", 0x63, 7, Format::B),
    i(Op::lb, "lb", 0x03, 0),
    i(Op::lh, "lh", 0x03, 1),
    i(Op::lw, "lw", 0x03, 2),
    i(Op::ld, "ld", 0x03, 3),
    i(Op::lbu, "lbu", 0x03, 4),
    i(Op::lhu, "lhu", 0x03, 5),
    i(Op::lwu, "lwu", 0x03, 6),
    s(Op::sb, "sb", 0x23, 0),
    s(Op::sh, "sh", 0x23, 1),
    s(Op::sw, "sw", 0x23, 2),
    s(Op::sd, "sd", 0x23, 3),
    i(Op::addi, "addi", 0x13, 0),
    i(Op::slti, "slti", 0x13, 2),
    i(Op::sltiu, "sltiu", 0x13, 3),
    i(Op::xori, "xori", 0x13, 4),
    i(Op::ori, "ori", 0x13, 6),
    i(Op::andi, "andi", 0x13, 7),
    sh(Op::slli, "slli", 0x13, 1, 0x00),
    sh(Op::srli, "srli", 0x13, 5, 0x00),
    sh(Op::srai, "srai", 0x13, 5, 0x10),
    r(Op::add, "add", 0x33, 0, 0x00),
    r(Op::sub, "sub", 0x33, 0, 0x20),
    r(Op::sll, "sll", 0x33, 1, 0x00),
    r(Op::slt, "slt", 0x33, 2, 0x00),
    r(Op::sltu, "sltu", 0x33, 3, 0x00),
    r(Op::xor_, "xor", 0x33, 4, 0x00),
    r(Op::srl, "srl", 0x33, 5, 0x00),
    r(Op::sra, "sra", 0x33, 5, 0x20),
    r(Op::or_, "or", 0x33, 6, 0x00),
    r(Op::and_, "and", 0x33, 7, 0x00),
    i(Op::addiw, "addiw", 0x1B, 0),
    shw(Op::slliw, "slliw", 0x1B, 1, 0x00),
    shw(Op::srliw, "srliw", 0x1B, 5, 0x00),
    shw(Op::sraiw, "sraiw", 0x1B, 5, 0x20),
    r(Op::addw, "addw", 0x3B, 0, 0x00),
    r(Op::subw, "subw", 0x3B, 0, 0x20),
    r(Op::sllw, "sllw", 0x3B, 1, 0x00),
    r(Op::srlw, "srlw", 0x3B, 5, 0x00),
    r(Op::sraw, "sraw", 0x3B, 5, 0x20),
    r(Op::mul, "mul", 0x33, 0, 0x01),
    r(Op::mulh, "mulh", 0x33, 1, 0x01),
    r(Op::mulhsu, "mulhsu", 0x33, 2, 0x01),
    r(Op::mulhu, "mulhu", 0x33, 3, 0x01),
    r(Op::div, "div", 0x33, 4, 0x01),
    r(Op::divu, "divu", 0x33, 5, 0x01),
    r(Op::rem, "rem", 0x33, 6, 0x01),
    r(Op::remu, "remu", 0x33, 7, 0x01),
    r(Op::mulw, "mulw", 0x3B, 0, 0x01),
    r(Op::divw, "divw", 0x3B, 4, 0x01),
    r(Op::divuw, "divuw", 0x3B, 5, 0x01),
    r(Op::remw, "remw", 0x3B, 6, 0x01),
    r(Op::remuw, "remuw", 0x3B, 7, 0x01),
    lr(Op::lr_w, "lr.w", 2),
    amo(Op::sc_w, "sc.w", 2, 0x03),
    amo(Op::amoswap_w, "amoswap.w", 2, 0x01),
    amo(Op::amoadd_w, "amoadd.w", 2, 0x00),
    amo(Op::amoxor_w, "amoxor.w", 2, 0x04),
    amo(Op::amoand_w, "amoand.w", 2, 0x0C),
    amo(Op::amoor_w, "amoor.w", 2, 0x08),
    amo(Op::amomin_w, "amomin.w", 2, 0x10),
    amo(Op::amomax_w, "amomax.w", 2, 0x14),
    amo(Op::amominu_w, "amominu.w", 2, 0x18),
    amo(Op::amomaxu_w, "amomaxu.w", 2, 0x1C),
    lr(Op::lr_d, "lr.d", 3),
    amo(Op::sc_d, "sc.d", 3, 0x03),
    amo(Op::amoswap_d, "amoswap.d", 3, 0x01),
    amo(Op::amoadd_d, "amoadd.d", 3, 0x00),
    amo(Op::amoxor_d, "amoxor.d", 3, 0x04),
    amo(Op::amoand_d, "amoand.d", 3, 0x0C),
    amo(Op::amoor_d, "amoor.d", 3, 0x08),
    amo(Op::amomin_d, "amomin.d", 3, 0x10),
    amo(Op::amomax_d, "amomax.d", 3, 0x14),
    amo(Op::amominu_d, "amominu.d", 3, 0x18),
    amo(Op::amomaxu_d, "amomaxu.d", 3, 0x1C),
    s(Op::fence, "fence", 0x0F, 0, Format::Fence),
    s(Op::fence_i, "fence.i", 0x0F, 1, Format::Fence),
    fixed(Op::ecall, "ecall", 0x00000073),
    fixed(Op::ebreak, "ebreak", 0x00100073),
    fixed(Op::sret, "sret", 0x10200073),
    fixed(Op::mret, "mret", 0x30200073),
    fixed(Op::wfi, "wfi", 0x10500073),
    f2(Op::sfence_vma, "sfence.vma", 0x09),
    f2(Op::hfence_vvma, "hfence.vvma", 0x11),
    f2(Op::hfence_gvma, "hfence.gvma", 0x31),
    csr_op(Op::csrrw, "csrrw", 1, Format::Csr),
    csr_op(Op::csrrs, "csrrs", 2, Format::Csr),
    csr_op(Op::csrrc, "csrrc", 3, Format::Csr),
    csr_op(Op::csrrwi, "csrrwi", 5, Format::CsrI),
    csr_op(Op::csrrsi, "csrrsi", 6, Format::CsrI),
    csr_op(Op::csrrci, "csrrci", 7, Format::CsrI),
    hlv(Op::hlv_b, "hlv.b", 0x30, 0),
    hlv(Op::hlv_bu, "hlv.bu", 0x30, 1),
    hlv(Op::hlv_h, "hlv.h", 0x32, 0),
    hlv(Op::hlv_hu, "hlv.hu", 0x32, 1),
    hlv(Op::hlvx_hu, "hlvx.hu", 0x32, 3),
    hlv(Op::hlv_w, "hlv.w", 0x34, 0),
    hlv(Op::hlv_wu, "hlv.wu", 0x34, 1),
    hlv(Op::hlvx_wu, "hlvx.wu", 0x34, 3),
    hlv(Op::hlv_d, "hlv.d", 0x36, 0),
    hsv(Op::hsv_b, "hsv.b", 0x31),
    hsv(Op::hsv_h, "hsv.h", 0x33),
    hsv(Op::hsv_w, "hsv.w", 0x35),
    hsv(Op::hsv_d, "hsv.d", 0x37),
}};

constexpr bool table_ordered() {
    for (size_t k = 0; k < kTable.size(); ++k)
        if (static_cast<size_t>(kTable[k].op) != k) return false;
    return true;
}
static_assert(table_ordered(), "op table must be indexed by Op");

constexpr bool table_unambiguous() {
    for (size_t a = 0; a < kTable.size(); ++a)
        for (size_t b = a + 1; b < kTable.size(); ++b) {
            const uint32_t common = kTable[a].mask & kTable[b].mask;
            if ((kTable[a].match & common) == (kTable[b].match & common)) return false;
        }
    return true;
}
static_assert(table_unambiguous(), "two encodings overlap");

int64_t sext(uint64_t v, unsigned bits) {
    const uint64_t m = 1ull << (bits - 1);
    return static_cast<int64_t>((v ^ m) - m);
}

uint32_t bits(uint32_t w, unsigned hi, unsigned lo) { return (w >> lo) & ((1u << (hi - lo + 1)) - 1); }

int64_t imm_i(uint32_t w) { return sext(w >> 20, 12); }
int64_t imm_s(uint32_t w) { return sext(bits(w, 31, 25) << 5 | bits(w, 11, 7), 12); }
int64_t imm_b(uint32_t w) {
    return sext(bits(w, 31, 31) << 12 | bits(w, 7, 7) << 11 | bits(w, 30, 25) << 5 | bits(w, 11, 8) << 1, 13);
}
int64_t imm_u(uint32_t w) { return sext(w & 0xFFFFF000u, 32); }
int64_t imm_j(uint32_t w) {
    return sext(bits(w, 31, 31) << 20 | bits(w, 19, 12) << 12 | bits(w, 20, 20) << 11 | bits(w, 30, 21) << 1, 21);
}

bool fits_signed(int64_t v, unsigned bits) {
    const int64_t lim = int64_t{1} << (bits - 1);
    return v >= -lim && v < lim;
}

} // namespace

std::span<const OpInfo> op_table() { return kTable; }

const OpInfo& op_info(Op op) { return kTable.at(static_cast<size_t>(op)); }

std::string_view op_name(Op op) { return op_info(op).name; }

std::optional<Op> op_from_name(std::string_view name) {
    for (const OpInfo& o : kTable)
        if (o.name == name) return o.op;
    return std::nullopt;
}

std::optional<Instruction> decode(uint32_t w) {
    const OpInfo* found = nullptr;
    for (const OpInfo& o : kTable) {
        if ((w & o.mask) == o.match) {
            found = &o;
            break;
        }
    }
    if (!found) return std::nullopt;

    Instruction in;
    in.op = found->op;
    in.raw = w;
    const auto rd = static_cast<uint8_t>(bits(w, 11, 7));
    const auto rs1 = static_cast<uint8_t>(bits(w, 19, 15));
    const auto rs2 = static_cast<uint8_t>(bits(w, 24, 20));
    switch (found->format) {
    case Format::R: in.rd = rd; in.rs1 = rs1; in.rs2 = rs2; break;
    case Format::I: in.rd = rd; in.rs1 = rs1; in.imm = imm_i(w); break;
    case Format::S: in.rs1 = rs1; in.rs2 = rs2; in.imm = imm_s(w); break;
    case Format::B: in.rs1 = rs1; in.rs2 = rs2; in.imm = imm_b(w); break;
    case Format::U: in.rd = rd; in.imm = imm_u(w); break;
    case Format::J: in.rd = rd; in.imm = imm_j(w); break;
    case Format::Shift: in.rd = rd; in.rs1 = rs1; in.imm = bits(w, 25, 20); break;
    case Format::ShiftW: in.rd = rd; in.rs1 = rs1; in.imm = bits(w, 24, 20); break;
    case Format::Amo:
        in.rd = rd; in.rs1 = rs1; in.rs2 = rs2;
        in.aqrl = static_cast<uint8_t>(bits(w, 26, 25));
        break;
    case Format::Lr:
        in.rd = rd; in.rs1 = rs1;
        in.aqrl = static_cast<uint8_t>(bits(w, 26, 25));
        break;
    case Format::Csr:
    case Format::CsrI: in.rd = rd; in.rs1 = rs1; in.imm = w >> 20; break;
    case Format::Fence: in.rd = rd; in.rs1 = rs1; in.imm = imm_i(w); break;
    case Format::Fixed: break;
    case Format::Fence2: in.rs1 = rs1; in.rs2 = rs2; break;
    case Format::Hlv: in.rd = rd; in.rs1 = rs1; break;
    case Format::Hsv: in.rs1 = rs1; in.rs2 = rs2; break;
    }
    return in;
}

std::optional<uint32_t> try_encode(const Instruction& in) {
    if (static_cast<size_t>(in.op) >= kOpCount) return std::nullopt;
    const OpInfo& o = op_info(in.op);
    if (in.rd > 31 || in.rs1 > 31 || in.rs2 > 31 || in.aqrl > 3) return std::nullopt;
    const uint32_t rd = uint32_t{in.rd} << 7;
    const uint32_t rs1 = uint32_t{in.rs1} << 15;
    const uint32_t rs2 = uint32_t{in.rs2} << 20;
    const auto imm = in.imm;
    const auto uimm = static_cast<uint64_t>(imm);
    const bool no_aq = in.aqrl == 0;

    auto need = [&](bool use_rd, bool use_rs1, bool use_rs2, bool use_imm, bool use_aq) {
        return (use_rd || in.rd == 0) && (use_rs1 || in.rs1 == 0) && (use_rs2 || in.rs2 == 0) &&
               (use_imm || imm == 0) && (use_aq || no_aq);
    };

    switch (o.format) {
    case Format::R:
        if (!need(true, true, true, false, false)) return std::nullopt;
        return o.match | rd | rs1 | rs2;
    case Format::I:
    case Format::Fence:
        if (!need(true, true, false, true, false) || !fits_signed(imm, 12)) return std::nullopt;
        return o.match | rd | rs1 | static_cast<uint32_t>(uimm & 0xFFF) << 20;
    case Format::S: {
        if (!need(false, true, true, true, false) || !fits_signed(imm, 12)) return std::nullopt;
        const auto v = static_cast<uint32_t>(uimm);
        return o.match | rs1 | rs2 | bits(v, 11, 5) << 25 | bits(v, 4, 0) << 7;
    }
    case Format::B: {
        if (!need(false, true, true, true, false) || !fits_signed(imm, 13) || (imm & 1)) return std::nullopt;
        const auto v = static_cast<uint32_t>(uimm);
        return o.match | rs1 | rs2 | bits(v, 12, 12) << 31 | bits(v, 10, 5) << 25 | bits(v, 4, 1) << 8 |
               bits(v, 11, 11) << 7;
    }
    case Format::U:
        if (!need(true, false, false, true, false) || !fits_signed(imm, 32) || (imm & 0xFFF)) return std::nullopt;
        return o.match | rd | (static_cast<uint32_t>(uimm) & 0xFFFFF000u);
    case Format::J: {
        if (!need(true, false, false, true, false) || !fits_signed(imm, 21) || (imm & 1)) return std::nullopt;
        const auto v = static_cast<uint32_t>(uimm);
        return o.match | rd | bits(v, 20, 20) << 31 | bits(v, 10, 1) << 21 | bits(v, 11, 11) << 20 |
               bits(v, 19, 12) << 12;
    }
    case Format::Shift:
        if (!need(true, true, false, true, false) || imm < 0 || imm > 63) return std::nullopt;
        return o.match | rd | rs1 | static_cast<uint32_t>(imm) << 20;
    case Format::ShiftW:
        if (!need(true, true, false, true, false) || imm < 0 || imm > 31) return std::nullopt;
        return o.match | rd | rs1 | static_cast<uint32_t>(imm) << 20;
    case Format::Amo:
        if (!need(true, true, true, false, true)) return std::nullopt;
        return o.match | rd | rs1 | rs2 | uint32_t{in.aqrl} << 25;
    case Format::Lr:
        if (!need(true, true, false, false, true)) return std::nullopt;
        return o.match | rd | rs1 | uint32_t{in.aqrl} << 25;
    case Format::Csr:
    case Format::CsrI:
        if (!need(true, true, false, true, false) || imm < 0 || imm > 0xFFF) return std::nullopt;
        return o.match | rd | rs1 | static_cast<uint32_t>(imm) << 20;
    case Format::Fixed:
        if (!need(false, false, false, false, false)) return std::nullopt;
        return o.match;
    case Format::Fence2:
    case Format::Hsv:
        if (!need(false, true, true, false, false)) return std::nullopt;
        return o.match | rs1 | rs2;
    case Format::Hlv:
        if (!need(true, true, false, false, false)) return std::nullopt;
        return o.match | rd | rs1;
    }
    return std::nullopt;
}

uint32_t encode(const Instruction& in) {
    if (auto w = try_encode(in)) return *w;
    throw std::invalid_argument("cannot encode " + disassemble(in));
}

std::string disassemble(const Instruction& in) {
    if (static_cast<size_t>(in.op) >= kOpCount) return "<bad op>";
    const OpInfo& o = op_info(in.op);
    auto x = [](unsigned r) { return "x" + std::to_string(r); };
    std::string s(o.name);
    const std::string imm = std::to_string(in.imm);
    switch (o.format) {
    case Format::R:
    case Format::Amo: return s + " " + x(in.rd) + "," + x(in.rs1) + "," + x(in.rs2);
    case Format::I:
    case Format::Fence:
    case Format::Shift:
    case Format::ShiftW: return s + " " + x(in.rd) + "," + x(in.rs1) + "," + imm;
    case Format::S:
    case Format::B: return s + " " + x(in.rs1) + "," + x(in.rs2) + "," + imm;
    case Format::U:
    case Format::J: return s + " " + x(in.rd) + "," + imm;
    case Format::Lr:
    case Format::Hlv: return s + " " + x(in.rd) + ",(" + x(in.rs1) + ")";
    case Format::Csr:
    case Format::CsrI: {
        const auto addr = static_cast<uint16_t>(in.imm);
        const std::string name = csr::name(addr) ? std::string(*csr::name(addr)) : std::to_string(in.imm);
        const std::string src = o.format == Format::Csr ? x(in.rs1) : std::to_string(in.rs1);
        return s + " " + x(in.rd) + "," + name + "," + src;
    }
    case Format::Fixed: return s;
    case Format::Fence2: return s + " " + x(in.rs1) + "," + x(in.rs2);
    case Format::Hsv: return s + " " + x(in.rs2) + ",(" + x(in.rs1) + ")";
    }
    return s;
}

} // namespace hvsim
