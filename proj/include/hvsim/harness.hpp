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

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvsim/machine.hpp"

namespace hvsim {

// Thrown for impossible scenario constructions (bad transitions, conflicting
// mappings, exhausted table pool).
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrapRecord {
    TrapCause cause;
    reg_t tval = 0;
    std::optional<addr_t> gpa;
    addr_t epc = 0;
    PrivilegeContext origin;
    PrivilegeContext target;
    bool gva = false;
    // htval (HS target) or mtval2 (M target) as left by trap entry.
    reg_t tval2 = 0;

    std::string to_string() const;
    friend bool operator==(const TrapRecord&, const TrapRecord&) = default;
};

// Instruction builders for scenario code.
namespace rv {
Instruction r(Op op, unsigned rd, unsigned rs1, unsigned rs2);
Instruction i(Op op, unsigned rd, unsigned rs1, int64_t imm);
Instruction s(Op op, unsigned rs1, unsigned rs2, int64_t imm); // stores and branches
Instruction u(Op op, unsigned rd, int64_t imm);
Instruction csr(Op op, unsigned rd, uint16_t addr, unsigned rs1_or_uimm);
Instruction amo(Op op, unsigned rd, unsigned rs1, unsigned rs2, unsigned aqrl = 0);
Instruction fixed(Op op);
Instruction fence2(Op op, unsigned rs1 = 0, unsigned rs2 = 0);
Instruction hlv(Op op, unsigned rd, unsigned rs1);
Instruction hsv(Op op, unsigned rs1, unsigned rs2);

inline Instruction addi(unsigned rd, unsigned rs1, int64_t imm) { return i(Op::addi, rd, rs1, imm); }
inline Instruction nop() { return addi(0, 0, 0); }
inline Instruction csrr(unsigned rd, uint16_t addr) { return csr(Op::csrrs, rd, addr, 0); }
inline Instruction csrw(uint16_t addr, unsigned rs1) { return csr(Op::csrrw, 0, addr, rs1); }
} // namespace rv

// Small assembler with forward labels, used to build flat images.
class Assembler {
public:
    explicit Assembler(addr_t base) : base_(base) {}

    addr_t base() const noexcept { return base_; }
    addr_t here() const noexcept { return base_ + words_.size() * 4; }

    void emit(const Instruction& in);
    void emit_word(uint32_t w) { words_.push_back(w); }
    // Loads an arbitrary 64-bit constant (up to 8 instructions).
    void li(unsigned rd, uint64_t value);
    void label(const std::string& name);
    // Branch or jal to a label; resolved by finish().
    void branch_to(Op op, unsigned rs1, unsigned rs2, const std::string& label);
    void jal_to(unsigned rd, const std::string& label);
    // Loads a label's absolute address.
    void la(unsigned rd, const std::string& label);
    addr_t address_of(const std::string& label) const;

    std::vector<uint8_t> finish();

private:
    struct Fixup {
        size_t index;
        Op op;
        unsigned rd_or_rs1;
        unsigned rs2;
        std::string label;
    };
    addr_t base_;
    std::vector<uint32_t> words_;
    std::map<std::string, addr_t> labels_;
    std::vector<Fixup> fixups_;
};

// One two-stage mapping request. Flags are PTE bits (R, W, X, U, A, D); V is
// added by the harness. Levels: 0 = 4 KiB, 1 = 2 MiB, 2 = 1 GiB.
struct Mapping {
    addr_t va = 0;
    addr_t gpa = 0;
    addr_t pa = 0;
    uint8_t s1 = 0;
    uint8_t s2 = 0;
    unsigned s1_level = 0;
    unsigned s2_level = 0;
    bool stage1 = true; // false: va is used as gpa
    bool stage2 = true; // false: gpa is used as pa
    bool guest = true;  // false: HS satp mapping va -> pa with s1 flags
};

inline constexpr uint8_t kRW = pte::R | pte::W | pte::A | pte::D;
inline constexpr uint8_t kRWX = pte::R | pte::W | pte::X | pte::A | pte::D;
inline constexpr uint8_t kRX = pte::R | pte::X | pte::A;
inline constexpr uint8_t kRO = pte::R | pte::A;
inline constexpr uint8_t kXO = pte::X | pte::A;

// Result of a harness-driven memory access.
struct Access {
    std::optional<uint64_t> value;
    std::optional<TrapRecord> trap;
    bool ok() const noexcept { return !trap; }
};

// Host-side driver for one machine: reset, privilege hopping, page-table
// construction, injected execution with trap capture and recovery.
class Harness {
public:
    static MachineConfig default_config();

    explicit Harness(const MachineConfig& config = default_config());

    void reset();

    Machine& machine() noexcept { return *m_; }
    HartState& hart() { return m_->hart(hart_); }
    Bus& bus() noexcept { return m_->bus(); }
    void select_hart(unsigned i);
    unsigned selected_hart() const noexcept { return hart_; }

    PrivilegeContext mode() { return hart().ctx; }
    // Switches to the target mode through a real mret from M.
    void goto_priv(PrivilegeContext target);

    // Runs one instruction in the current mode. A trap is recorded, then the
    // handler level returns past the instruction (epc + 4, or epc for an
    // interrupt) with its xret, unless recover is false.
    std::optional<TrapRecord> exec(const Instruction& in, bool recover = true);
    std::optional<TrapRecord> exec_word(uint32_t word, bool recover = true);
    // One real fetch-execute step at the current pc.
    StepOutcome step();

    // Recovery of the last trap, when exec was called with recover = false.
    void recover(const TrapRecord& rec);

    reg_t reg(unsigned i) { return hart().x[i]; }
    void set_reg(unsigned i, reg_t v) { hart().x.write(i, v); }

    // Unchecked CSR access as seen from M. Writes flush the TLB.
    reg_t csr(uint16_t addr);
    void set_csr(uint16_t addr, reg_t value);
    // CSR instruction from the current mode.
    Result<reg_t> csr_read(uint16_t addr);
    Result<reg_t> csr_write(uint16_t addr, reg_t value);

    uint64_t read_phys(addr_t pa, unsigned width = 8);
    void write_phys(addr_t pa, uint64_t value, unsigned width = 8);

    // Data accesses from the current mode through a real load/store.
    Access load(addr_t va, unsigned width = 8);
    Access store(addr_t va, uint64_t value, unsigned width = 8);
    // Instruction fetch from the current mode at va; the word there runs.
    Access fetch(addr_t va);
    // Hypervisor load/store from the current mode.
    Access hlv(Op op, addr_t va);
    Access hsv(Op op, addr_t va, uint64_t value);

    // Page tables. Roots are allocated on first use and the matching atp CSR
    // is written (Sv39 / Sv39x4).
    void map(const Mapping& m);
    void enable_stage1(bool guest);
    void enable_stage2();
    addr_t vsatp_root() const noexcept { return vs_root_; }
    addr_t satp_root() const noexcept { return s_root_; }
    addr_t hgatp_root() const noexcept { return g_root_; }
    // Raw PTE editing for fault-injection scenarios.
    std::optional<addr_t> pte_address(bool gstage, bool guest, addr_t addr, unsigned level);
    addr_t alloc_table(size_t bytes);

    // Physical region reserved for tables; scenarios keep data elsewhere.
    addr_t pool_base() const noexcept { return pool_base_; }
    addr_t data_base() const noexcept { return m_->config().map.ram_base + 0x10'0000; }

    const std::vector<TrapRecord>& traps() const noexcept { return traps_; }
    void clear_traps() { traps_.clear(); }

    // FNV-1a digest over every step's architectural state.
    uint64_t trace_digest() const noexcept { return digest_; }
    uint64_t trace_steps() const noexcept { return steps_; }

private:
    void install_hooks();
    void flush_tlbs();
    void record_step(unsigned hart, const StepOutcome& out);
    void map_stage(addr_t root, bool gstage, bool guest_tables, addr_t in, addr_t out, uint8_t flags,
                   unsigned level);
    void identity_map_table(addr_t page);
    std::optional<TrapRecord> finish(const StepOutcome& out, bool recover);

    MachineConfig cfg_;
    std::unique_ptr<Machine> m_;
    unsigned hart_ = 0;
    std::vector<TrapRecord> traps_;
    addr_t pool_base_ = 0;
    addr_t pool_next_ = 0;
    addr_t pool_end_ = 0;
    addr_t vs_root_ = 0;
    addr_t s_root_ = 0;
    addr_t g_root_ = 0;
    std::vector<addr_t> guest_tables_;
    addr_t scratch_pc_ = 0;
    uint64_t digest_ = 0;
    uint64_t steps_ = 0;
};

} // namespace hvsim
