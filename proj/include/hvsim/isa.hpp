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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace hvsim {

// RV64IMA + Zicsr + Zifencei + privileged + hypervisor instructions.
#define HVSIM_OPS(X)                                                                       \
    X(lui, "lui") X(auipc, "auipc") X(jal, "jal") X(jalr, "jalr")                          \
    X(beq, "beq") X(bne, "bne") X(blt, "blt") X(bge, "bge") X(bltu, "bltu") X(bgeu, "bgeu") \
    X(lb, "lb") X(lh, "lh") X(lw, "lw") X(ld, "ld") X(lbu, "lbu") X(lhu, "lhu")            \
    X(lwu, "lwu") X(sb, "sb") X(sh, "sh") X(sw, "sw") X(sd, "sd")                          \
    X(addi, "addi") X(slti, "slti") X(sltiu, "sltiu") X(xori, "xori") X(ori, "ori")        \
    X(andi, "andi") X(slli, "slli") X(srli, "srli") X(srai, "srai")                        \
    X(add, "add") X(sub, "sub") X(sll, "sll") X(slt, "slt") X(sltu, "sltu")                \
    X(xor_, "xor") X(srl, "srl") X(sra, "sra") X(or_, "or") X(and_, "and")                 \
    X(addiw, "addiw") X(slliw, "slliw") X(srliw, "srliw") X(sraiw, "sraiw")                \
    X(addw, "addw") X(subw, "subw") X(sllw, "sllw") X(srlw, "srlw") X(sraw, "sraw")        \
    X(mul, "mul") X(mulh, "mulh") X(mulhsu, "mulhsu") X(mulhu, "mulhu") X(div, "div")      \
    X(divu, "divu") X(rem, "rem") X(remu, "remu") X(mulw, "mulw") X(divw, "divw")          \
    X(divuw, "divuw") X(remw, "remw") X(remuw, "remuw")                                    \
    X(lr_w, "lr.w") X(sc_w, "sc.w") X(amoswap_w, "amoswap.w") X(amoadd_w, "amoadd.w")      \
    X(amoxor_w, "amoxor.w") X(amoand_w, "amoand.w") X(amoor_w, "amoor.w")                  \
    X(amomin_w, "amomin.w") X(amomax_w, "amomax.w") X(amominu_w, "amominu.w")              \
    X(amomaxu_w, "amomaxu.w")                                                              \
    X(lr_d, "lr.d") X(sc_d, "sc.d") X(amoswap_d, "amoswap.d") X(amoadd_d, "amoadd.d")      \
    X(amoxor_d, "amoxor.d") X(amoand_d, "amoand.d") X(amoor_d, "amoor.d")                  \
    X(amomin_d, "amomin.d") X(amomax_d, "amomax.d") X(amominu_d, "amominu.d")              \
    X(amomaxu_d, "amomaxu.d")                                                              \
    X(fence, "fence") X(fence_i, "fence.i")                                                \
    X(ecall, "ecall") X(ebreak, "ebreak") X(sret, "sret") X(mret, "mret") X(wfi, "wfi")    \
    X(sfence_vma, "sfence.vma") X(hfence_vvma, "hfence.vvma") X(hfence_gvma, "hfence.gvma") \
    X(csrrw, "csrrw") X(csrrs, "csrrs") X(csrrc, "csrrc") X(csrrwi, "csrrwi")              \
    X(csrrsi, "csrrsi") X(csrrci, "csrrci")                                                \
    X(hlv_b, "hlv.b") X(hlv_bu, "hlv.bu") X(hlv_h, "hlv.h") X(hlv_hu, "hlv.hu")            \
    X(hlvx_hu, "hlvx.hu") X(hlv_w, "hlv.w") X(hlv_wu, "hlv.wu") X(hlvx_wu, "hlvx.wu")      \
    X(hlv_d, "hlv.d") X(hsv_b, "hsv.b") X(hsv_h, "hsv.h") X(hsv_w, "hsv.w") X(hsv_d, "hsv.d")

enum class Op : uint8_t {
#define HVSIM_OP_ENUM(id, str) id,
    HVSIM_OPS(HVSIM_OP_ENUM)
#undef HVSIM_OP_ENUM
        count_
};

inline constexpr size_t kOpCount = static_cast<size_t>(Op::count_);

// Operand layout of an instruction.
enum class Format : uint8_t {
    R,      // rd, rs1, rs2
    I,      // rd, rs1, imm12
    S,      // rs1, rs2, imm12
    B,      // rs1, rs2, imm13 (even)
    U,      // rd, imm (low 12 bits zero)
    J,      // rd, imm21 (even)
    Shift,  // rd, rs1, shamt 0..63
    ShiftW, // rd, rs1, shamt 0..31
    Amo,    // rd, rs1, rs2, aqrl
    Lr,     // rd, rs1, aqrl
    Csr,    // rd, rs1, imm = csr number
    CsrI,   // rd, rs1 = uimm5, imm = csr number
    Fence,  // rd, rs1, imm12
    Fixed,  // no operands
    Fence2, // rs1, rs2 (sfence.vma, hfence.*)
    Hlv,    // rd, rs1
    Hsv,    // rs1, rs2
};

struct OpInfo {
    Op op;
    std::string_view name;
    Format format;
    uint32_t match;
    uint32_t mask;
};

std::span<const OpInfo> op_table();
const OpInfo& op_info(Op op);
std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

struct Instruction {
    Op op = Op::addi;
    uint8_t rd = 0;
    uint8_t rs1 = 0;
    uint8_t rs2 = 0;
    int64_t imm = 0;
    uint8_t aqrl = 0;
    uint32_t raw = 0;

    // Raw bits are not part of the identity.
    friend bool operator==(const Instruction& a, const Instruction& b) {
        return a.op == b.op && a.rd == b.rd && a.rs1 == b.rs1 && a.rs2 == b.rs2 &&
               a.imm == b.imm && a.aqrl == b.aqrl;
    }
};

// nullopt for an illegal or unimplemented encoding.
std::optional<Instruction> decode(uint32_t word);

// nullopt when an operand is out of range for the op's format, or a field the
// format does not carry is nonzero.
std::optional<uint32_t> try_encode(const Instruction& inst);
// Throws std::invalid_argument instead of returning nullopt.
uint32_t encode(const Instruction& inst);

std::string disassemble(const Instruction& inst);

} // namespace hvsim
