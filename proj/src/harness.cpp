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

#include "hvsim/harness.hpp"

#include <cstdio>
#include <cstring>

namespace hvsim {

namespace {

int64_t sext12(uint64_t v) { return static_cast<int64_t>(((v & 0xFFF) ^ 0x800)) - 0x800; }

std::string hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

void fnv(uint64_t& h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xFF;
        h *= kFnvPrime;
    }
}

// Architectural CSRs folded into the step digest.
constexpr uint16_t kDigestCsrs[] = {
    csr::mstatus, csr::mepc,   csr::mcause,  csr::mtval,  csr::mtval2,  csr::mip,
    csr::hstatus, csr::htval,  csr::hvip,    csr::sepc,   csr::scause,  csr::stval,
    csr::vsstatus, csr::vsepc, csr::vscause, csr::vstval, csr::satp,    csr::vsatp,
    csr::hgatp,
};

} // namespace

std::string TrapRecord::to_string() const {
    std::string s = cause_name(cause) + " tval=" + hex(tval);
    if (gpa) s += " gpa=" + hex(*gpa);
    s += " epc=" + hex(epc) + " " + std::string(mode_name(origin)) + "->" + std::string(mode_name(target));
    if (gva) s += " gva";
    return s;
}

namespace rv {
Instruction r(Op op, unsigned rd, unsigned rs1, unsigned rs2) {
    Instruction in;
    in.op = op;
    in.rd = static_cast<uint8_t>(rd);
    in.rs1 = static_cast<uint8_t>(rs1);
    in.rs2 = static_cast<uint8_t>(rs2);
    return in;
}
Instruction i(Op op, unsigned rd, unsigned rs1, int64_t imm) {
    Instruction in = r(op, rd, rs1, 0);
    in.imm = imm;
    return in;
}
Instruction s(Op op, unsigned rs1, unsigned rs2, int64_t imm) {
    Instruction in = r(op, 0, rs1, rs2);
    in.imm = imm;
    return in;
}
Instruction u(Op op, unsigned rd, int64_t imm) { return i(op, rd, 0, imm); }
Instruction csr(Op op, unsigned rd, uint16_t addr, unsigned rs1_or_uimm) {
    return i(op, rd, rs1_or_uimm, addr);
}
Instruction amo(Op op, unsigned rd, unsigned rs1, unsigned rs2, unsigned aqrl) {
    Instruction in = r(op, rd, rs1, op == Op::lr_w || op == Op::lr_d ? 0 : rs2);
    in.aqrl = static_cast<uint8_t>(aqrl);
    return in;
}
Instruction fixed(Op op) { return r(op, 0, 0, 0); }
Instruction fence2(Op op, unsigned rs1, unsigned rs2) { return r(op, 0, rs1, rs2); }
Instruction hlv(Op op, unsigned rd, unsigned rs1) { return r(op, rd, rs1, 0); }
Instruction hsv(Op op, unsigned rs1, unsigned rs2) { return r(op, 0, rs1, rs2); }
} // namespace rv

void Assembler::emit(const Instruction& in) { words_.push_back(encode(in)); }

void Assembler::li(unsigned rd, uint64_t value) {
    const auto sv = static_cast<int64_t>(value);
    if (sv >= INT32_MIN && sv <= INT32_MAX) {
        const int64_t lo = sext12(value);
        const int64_t hi = sv - lo;
        if (hi != 0) {
            emit(rv::u(Op::lui, rd, static_cast<int32_t>(static_cast<uint32_t>(hi))));
            if (lo != 0) emit(rv::i(Op::addiw, rd, rd, lo));
        } else {
            emit(rv::addi(rd, 0, lo));
        }
        return;
    }
    const int64_t lo = sext12(value);
    const int64_t hi = (sv - lo) >> 12;
    li(rd, static_cast<uint64_t>(hi));
    emit(rv::i(Op::slli, rd, rd, 12));
    if (lo != 0) emit(rv::addi(rd, rd, lo));
}

void Assembler::label(const std::string& name) {
    if (!labels_.emplace(name, here()).second) throw ScenarioError("duplicate label " + name);
}

void Assembler::branch_to(Op op, unsigned rs1, unsigned rs2, const std::string& name) {
    fixups_.push_back({words_.size(), op, rs1, rs2, name});
    words_.push_back(0);
}

void Assembler::jal_to(unsigned rd, const std::string& name) {
    fixups_.push_back({words_.size(), Op::jal, rd, 0, name});
    words_.push_back(0);
}

void Assembler::la(unsigned rd, const std::string& name) {
    fixups_.push_back({words_.size(), Op::auipc, rd, 0, name});
    words_.push_back(0);
    words_.push_back(0);
}

addr_t Assembler::address_of(const std::string& name) const {
    auto it = labels_.find(name);
    if (it == labels_.end()) throw ScenarioError("unknown label " + name);
    return it->second;
}

std::vector<uint8_t> Assembler::finish() {
    for (const Fixup& f : fixups_) {
        const addr_t pc = base_ + f.index * 4;
        const auto off = static_cast<int64_t>(address_of(f.label) - pc);
        if (f.op == Op::jal) {
            words_[f.index] = encode(rv::u(Op::jal, f.rd_or_rs1, off));
        } else if (f.op == Op::auipc) {
            const int64_t lo = sext12(static_cast<uint64_t>(off));
            words_[f.index] = encode(rv::u(Op::auipc, f.rd_or_rs1, off - lo));
            words_[f.index + 1] = encode(rv::addi(f.rd_or_rs1, f.rd_or_rs1, lo));
        } else {
            words_[f.index] = encode(rv::s(f.op, f.rd_or_rs1, f.rs2, off));
        }
    }
    fixups_.clear();
    std::vector<uint8_t> bytes(words_.size() * 4);
    std::memcpy(bytes.data(), words_.data(), bytes.size());
    return bytes;
}

MachineConfig Harness::default_config() {
    MachineConfig c;
    c.harts = 1;
    c.geilen = 2;
    c.num_sources = 63;
    c.num_blocks = 2;
    c.viirs_per_block = 4;
    c.mgmt_irq_base = 60;
    c.bench_irq = 1;
    return c;
}

Harness::Harness(const MachineConfig& config) : cfg_(config), m_(std::make_unique<Machine>(config)) {
    reset();
}

void Harness::install_hooks() {
    m_->set_trap_hook([this](const TrapEvent& ev) {
        const CsrFile& c = m_->hart(ev.hart).csrs;
        TrapRecord r;
        r.cause = ev.info.cause;
        r.tval = ev.info.tval;
        r.gpa = ev.info.gpa;
        r.epc = ev.info.pc;
        r.origin = ev.from;
        r.target = target_context(ev.target);
        r.gva = ev.info.gva;
        if (ev.target == TrapTarget::M) r.tval2 = c.mtval2;
        if (ev.target == TrapTarget::HS) r.tval2 = c.htval;
        traps_.push_back(r);
    });
    m_->set_step_hook([this](unsigned hart, const StepOutcome& out) { record_step(hart, out); });
}

void Harness::reset() {
    m_->reset();
    install_hooks();
    hart_ = 0;
    traps_.clear();
    const MemoryMap& map = cfg_.map;
    const uint64_t pool_size = std::min<uint64_t>(4ull << 20, map.ram_size / 4);
    pool_base_ = map.ram_base + map.ram_size - pool_size;
    pool_next_ = pool_base_;
    pool_end_ = pool_base_ + pool_size;
    vs_root_ = s_root_ = g_root_ = 0;
    guest_tables_.clear();
    scratch_pc_ = map.ram_base + 0x1000;
    for (unsigned i = 0; i < m_->num_harts(); ++i) m_->hart(i).pc = scratch_pc_;
    digest_ = kFnvOffset;
    steps_ = 0;
}

void Harness::select_hart(unsigned i) {
    if (i >= m_->num_harts()) throw ScenarioError("no such hart");
    hart_ = i;
}

void Harness::record_step(unsigned hart, const StepOutcome& out) {
    const HartState& h = m_->hart(hart);
    fnv(digest_, hart);
    fnv(digest_, out.pc);
    fnv(digest_, out.raw);
    fnv(digest_, static_cast<uint64_t>(out.ctx.priv) | (uint64_t{out.ctx.virt} << 8) |
                     (static_cast<uint64_t>(out.kind) << 16));
    if (out.trap) {
        fnv(digest_, out.trap->cause.encoded());
        fnv(digest_, out.trap->tval);
        fnv(digest_, out.trap->gpa.value_or(~0ull));
    }
    fnv(digest_, h.pc);
    for (unsigned r = 1; r < 32; ++r) fnv(digest_, h.x[r]);
    for (uint16_t a : kDigestCsrs) fnv(digest_, csr_peek(h, m_->bus().clint, a));
    ++steps_;
}

void Harness::flush_tlbs() {
    for (unsigned i = 0; i < m_->num_harts(); ++i) m_->hart(i).tlb.clear();
}

void Harness::goto_priv(PrivilegeContext target) {
    if (!target.valid()) throw ScenarioError("impossible target mode");
    HartState& h = hart();
    h.waiting = false;
    h.ctx = kModeM;
    if (target.is_m()) return;
    reg_t s = h.csrs.mstatus;
    s = (s & ~status::MPP) | (static_cast<reg_t>(target.priv) << status::MPP_SHIFT);
    s = target.virt ? (s | status::MPV) : (s & ~status::MPV);
    h.csrs.mstatus = s;
    h.csrs.mepc = h.pc;
    const StepOutcome out = m_->execute(hart_, encode(rv::fixed(Op::mret)));
    if (out.kind != StepKind::retired || !(h.ctx == target))
        throw ScenarioError("mret did not reach " + std::string(mode_name(target)));
}

std::optional<TrapRecord> Harness::finish(const StepOutcome& out, bool do_recover) {
    if (out.kind != StepKind::trapped) return std::nullopt;
    TrapRecord rec = traps_.back();
    if (do_recover) recover(rec);
    return rec;
}

std::optional<TrapRecord> Harness::exec(const Instruction& in, bool do_recover) {
    return exec_word(encode(in), do_recover);
}

std::optional<TrapRecord> Harness::exec_word(uint32_t word, bool do_recover) {
    return finish(m_->execute(hart_, word), do_recover);
}

StepOutcome Harness::step() { return m_->step(hart_); }

void Harness::recover(const TrapRecord& rec) {
    HartState& h = hart();
    CsrFile& c = h.csrs;
    const reg_t bump = rec.cause.is_interrupt ? 0 : 4;
    XretKind kind = XretKind::sret;
    if (rec.target.is_m()) {
        c.mepc += bump;
        kind = XretKind::mret;
    } else if (rec.target.is_hs()) {
        c.sepc += bump;
    } else {
        c.vsepc += bump;
    }
    // The return must not trip TSR/VTSR set by the scenario itself.
    const reg_t tsr = c.mstatus & status::TSR;
    const reg_t vtsr = c.hstatus & hstatus_bits::VTSR;
    c.mstatus &= ~status::TSR;
    c.hstatus &= ~hstatus_bits::VTSR;
    const MaybeTrap t = execute_xret(h, kind);
    c.mstatus |= tsr;
    c.hstatus |= vtsr;
    if (t) throw ScenarioError("trap recovery failed: " + cause_name(t->cause));
    if (!(h.ctx == rec.origin)) throw ScenarioError("trap recovery landed in the wrong mode");
}

reg_t Harness::csr(uint16_t addr) { return csr_peek(hart(), bus().clint, addr); }

void Harness::set_csr(uint16_t addr, reg_t value) {
    csr_poke(hart(), bus().clint, addr, value);
    flush_tlbs();
}

namespace {
TrapInfo as_info(const TrapRecord& r) {
    TrapInfo t{r.cause, r.tval, r.gpa, r.epc, r.gva};
    return t;
}
} // namespace

Result<reg_t> Harness::csr_read(uint16_t addr) {
    if (auto t = exec(rv::csrr(6, addr))) return as_info(*t);
    return reg(6);
}

Result<reg_t> Harness::csr_write(uint16_t addr, reg_t value) {
    set_reg(5, value);
    if (auto t = exec(rv::csr(Op::csrrw, 6, addr, 5))) return as_info(*t);
    return reg(6);
}

uint64_t Harness::read_phys(addr_t pa, unsigned width) {
    auto v = bus().read(pa, width);
    if (!v) throw ScenarioError("physical read fault at " + hex(pa));
    return *v;
}

void Harness::write_phys(addr_t pa, uint64_t value, unsigned width) {
    if (!bus().write(pa, width, value)) throw ScenarioError("physical write fault at " + hex(pa));
}

Access Harness::load(addr_t va, unsigned width) {
    Op op = Op::ld;
    if (width == 1) op = Op::lbu;
    if (width == 2) op = Op::lhu;
    if (width == 4) op = Op::lwu;
    set_reg(5, va);
    if (auto t = exec(rv::i(op, 6, 5, 0))) return Access{std::nullopt, t};
    return Access{reg(6), std::nullopt};
}

Access Harness::store(addr_t va, uint64_t value, unsigned width) {
    Op op = Op::sd;
    if (width == 1) op = Op::sb;
    if (width == 2) op = Op::sh;
    if (width == 4) op = Op::sw;
    set_reg(5, va);
    set_reg(6, value);
    if (auto t = exec(rv::s(op, 5, 6, 0))) return Access{std::nullopt, t};
    return Access{std::nullopt, std::nullopt};
}

Access Harness::fetch(addr_t va) {
    HartState& h = hart();
    const addr_t saved = h.pc;
    h.pc = va;
    const StepOutcome out = m_->step(hart_);
    std::optional<TrapRecord> t = finish(out, true);
    h.pc = saved;
    if (t) return Access{std::nullopt, t};
    return Access{out.raw, std::nullopt};
}

Access Harness::hlv(Op op, addr_t va) {
    set_reg(5, va);
    if (auto t = exec(rv::hlv(op, 6, 5))) return Access{std::nullopt, t};
    return Access{reg(6), std::nullopt};
}

Access Harness::hsv(Op op, addr_t va, uint64_t value) {
    set_reg(5, va);
    set_reg(6, value);
    if (auto t = exec(rv::hsv(op, 5, 6))) return Access{std::nullopt, t};
    return Access{std::nullopt, std::nullopt};
}

addr_t Harness::alloc_table(size_t bytes) {
    const addr_t base = (pool_next_ + bytes - 1) / bytes * bytes;
    if (base + bytes > pool_end_) throw ScenarioError("page-table pool exhausted");
    pool_next_ = base + bytes;
    for (addr_t a = base; a < base + bytes; a += 8) write_phys(a, 0);
    return base;
}

void Harness::enable_stage1(bool guest) {
    if (guest) {
        if (!vs_root_) {
            vs_root_ = alloc_table(4096);
            guest_tables_.push_back(vs_root_);
            if (g_root_) identity_map_table(vs_root_);
        }
        set_csr(csr::vsatp, atp::make(atp::MODE_SV39, vs_root_ >> 12));
    } else {
        if (!s_root_) s_root_ = alloc_table(4096);
        set_csr(csr::satp, atp::make(atp::MODE_SV39, s_root_ >> 12));
    }
}

void Harness::enable_stage2() {
    if (!g_root_) {
        g_root_ = alloc_table(16384);
        for (addr_t page : guest_tables_) identity_map_table(page);
    }
    set_csr(csr::hgatp, atp::make(atp::MODE_SV39X4, g_root_ >> 12));
}

void Harness::identity_map_table(addr_t page) {
    map_stage(g_root_, true, false, page, page, pte::R | pte::W | pte::U | pte::A | pte::D, 0);
}

namespace {
unsigned index_at(bool gstage, addr_t in, unsigned level) {
    if (gstage && level == 2) return static_cast<unsigned>((in >> 30) & 0x7FF);
    return static_cast<unsigned>((in >> (12 + 9 * level)) & 0x1FF);
}
} // namespace

void Harness::map_stage(addr_t root, bool gstage, bool guest_tables, addr_t in, addr_t out, uint8_t flags,
                        unsigned level) {
    if (level > 2) throw ScenarioError("bad page level");
    const uint64_t size = 1ull << (12 + 9 * level);
    if (in % size || out % size) throw ScenarioError("mapping not aligned to its page size");
    if (gstage && (in >> kGpaBits)) throw ScenarioError("gpa wider than 41 bits");
    addr_t table = root;
    for (unsigned lvl = 2; lvl > level; --lvl) {
        const addr_t slot = table + index_at(gstage, in, lvl) * 8;
        const Pte p{read_phys(slot)};
        if (p.valid()) {
            if (p.leaf()) throw ScenarioError("conflicting prior mapping at " + hex(in));
            table = p.ppn() << 12;
            continue;
        }
        const addr_t next = alloc_table(4096);
        if (guest_tables) {
            guest_tables_.push_back(next);
            if (g_root_) identity_map_table(next);
        }
        write_phys(slot, Pte::make(next >> 12, pte::V).raw);
        table = next;
    }
    const addr_t slot = table + index_at(gstage, in, level) * 8;
    const Pte want = Pte::make(out >> 12, static_cast<uint8_t>(flags | pte::V));
    const Pte have{read_phys(slot)};
    if (have.valid() && have.raw != want.raw) throw ScenarioError("conflicting prior mapping at " + hex(in));
    write_phys(slot, want.raw);
}

void Harness::map(const Mapping& m) {
    if (m.guest) {
        const addr_t gpa = m.stage1 ? m.gpa : m.va;
        if (m.stage1) {
            enable_stage1(true);
            map_stage(vs_root_, false, true, m.va, gpa, m.s1, m.s1_level);
        }
        if (m.stage2) {
            enable_stage2();
            map_stage(g_root_, true, false, gpa, m.pa, m.s2, m.s2_level);
        }
    } else {
        enable_stage1(false);
        map_stage(s_root_, false, false, m.va, m.pa, m.s1, m.s1_level);
    }
    flush_tlbs();
}

std::optional<addr_t> Harness::pte_address(bool gstage, bool guest, addr_t addr, unsigned level) {
    addr_t table = gstage ? g_root_ : (guest ? vs_root_ : s_root_);
    if (!table) return std::nullopt;
    for (unsigned lvl = 2; lvl > level; --lvl) {
        const Pte p{read_phys(table + index_at(gstage, addr, lvl) * 8)};
        if (!p.valid() || p.leaf()) return std::nullopt;
        table = p.ppn() << 12;
    }
    return table + index_at(gstage, addr, level) * 8;
}

} // namespace hvsim
