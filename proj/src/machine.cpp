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

#include "hvsim/machine.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hvsim {

namespace {

int64_t sext32(uint64_t v) { return static_cast<int32_t>(static_cast<uint32_t>(v)); }

uint64_t sext_width(uint64_t v, unsigned width) {
    switch (width) {
    case 1: return static_cast<uint64_t>(static_cast<int64_t>(static_cast<int8_t>(v)));
    case 2: return static_cast<uint64_t>(static_cast<int64_t>(static_cast<int16_t>(v)));
    case 4: return static_cast<uint64_t>(sext32(v));
    default: return v;
    }
}

TrapInfo mem_fault(Exception e, addr_t va, bool gva) {
    TrapInfo t = TrapInfo::of(e, va);
    t.gva = gva;
    return t;
}

uint64_t div_s(int64_t a, int64_t b) {
    if (b == 0) return ~0ull;
    if (a == INT64_MIN && b == -1) return static_cast<uint64_t>(a);
    return static_cast<uint64_t>(a / b);
}
uint64_t rem_s(int64_t a, int64_t b) {
    if (b == 0) return static_cast<uint64_t>(a);
    if (a == INT64_MIN && b == -1) return 0;
    return static_cast<uint64_t>(a % b);
}
uint64_t div_u(uint64_t a, uint64_t b) { return b == 0 ? ~0ull : a / b; }
uint64_t rem_u(uint64_t a, uint64_t b) { return b == 0 ? a : a % b; }

unsigned load_width(Op op) {
    switch (op) {
    case Op::lb: case Op::lbu: case Op::hlv_b: case Op::hlv_bu: case Op::sb: case Op::hsv_b: return 1;
    case Op::lh: case Op::lhu: case Op::hlv_h: case Op::hlv_hu: case Op::hlvx_hu: case Op::sh:
    case Op::hsv_h: return 2;
    case Op::lw: case Op::lwu: case Op::hlv_w: case Op::hlv_wu: case Op::hlvx_wu: case Op::sw:
    case Op::hsv_w: return 4;
    default: return 8;
    }
}

bool load_signed(Op op) {
    switch (op) {
    case Op::lb: case Op::lh: case Op::lw: case Op::ld:
    case Op::hlv_b: case Op::hlv_h: case Op::hlv_w: case Op::hlv_d: return true;
    default: return false;
    }
}

} // namespace

void MachineConfig::validate() const {
    if (harts == 0 || harts > Clint::kMaxHarts) throw std::invalid_argument("harts must be in 1..4095");
    if (geilen > Plic::kMaxGeilen) throw std::invalid_argument("geilen must be at most 63");
    if (ticks_per_step == 0) throw std::invalid_argument("ticks per step must be at least 1");
    map.validate();
    bus_config().plic.validate();
}

BusConfig MachineConfig::bus_config() const {
    BusConfig b;
    b.map = map;
    b.num_harts = harts;
    b.plic.num_sources = num_sources;
    b.plic.num_harts = harts;
    b.plic.geilen = geilen;
    b.plic.num_blocks = num_blocks;
    b.plic.viirs_per_block = viirs_per_block;
    b.plic.mgmt_irq_base = mgmt_irq_base;
    b.plic.mutations = mutations;
    b.bench_irq = bench_irq;
    b.mutations = mutations;
    return b;
}

Machine::Machine(const MachineConfig& config)
    : cfg_((config.validate(), config)), bus_(cfg_.bus_config()) {
    reset();
}

void Machine::reset() {
    bus_.reset();
    harts_.clear();
    harts_.reserve(cfg_.harts);
    for (unsigned i = 0; i < cfg_.harts; ++i) {
        harts_.emplace_back(i, cfg_.geilen, cfg_.tlb_capacity, cfg_.mutations);
        harts_.back().pc = cfg_.map.ram_base;
    }
    rounds_ = 0;
}

void Machine::refresh_lines(unsigned i) {
    HartState& h = harts_.at(i);
    const Clint::Lines c = bus_.clint.lines(i);
    HardwareLines hw;
    hw.msip = c.msip;
    hw.mtip = c.mtip;
    hw.stip = c.stip;
    hw.vstip = c.vstip;
    const Plic& p = bus_.plic;
    hw.meip = p.context_line(p.context_index(i, Plic::ContextKind::M));
    hw.seip = p.context_line(p.context_index(i, Plic::ContextKind::S));
    for (unsigned g = 1; g <= cfg_.geilen; ++g)
        if (p.context_line(p.context_index(i, Plic::ContextKind::VS, g))) hw.hgeip |= 1ull << g;
    h.csrs.hw = hw;
}

void Machine::tick() {
    bus_.tick(cfg_.ticks_per_step);
    ++rounds_;
}

RunResult Machine::run(uint64_t max_steps) {
    RunResult r;
    for (;;) {
        for (unsigned i = 0; i < harts_.size(); ++i) {
            if (auto code = bus_.host.exit_code()) {
                r.stop = RunResult::Stop::exited;
                r.exit_code = *code;
                return r;
            }
            if (r.steps >= max_steps) {
                r.stop = RunResult::Stop::budget;
                return r;
            }
            step(i);
            ++r.steps;
        }
        tick();
    }
}

StepOutcome Machine::step(unsigned i) { return step_impl(i, std::nullopt); }

StepOutcome Machine::execute(unsigned i, uint32_t raw) { return step_impl(i, raw); }

StepOutcome Machine::enter_trap(HartState& h, TrapInfo info, StepOutcome out) {
    if (info.cause.is(Exception::VirtualInstruction) &&
        has_mutation(h.csrs.mutations, Mutation::virtual_instruction))
        info.cause = TrapCause::exception(Exception::IllegalInstruction);
    const PrivilegeContext from = h.ctx;
    const TrapTarget target = resolve_target(info.cause, from, h.csrs);
    take_trap(h, info, target);
    out.kind = StepKind::trapped;
    out.trap = info;
    out.target = target;
    if (trap_hook_) trap_hook_(TrapEvent{h.hart_id, info, from, target});
    if (step_hook_) step_hook_(h.hart_id, out);
    return out;
}

StepOutcome Machine::step_impl(unsigned i, std::optional<uint32_t> injected) {
    HartState& h = harts_.at(i);
    refresh_lines(i);
    StepOutcome out;
    out.pc = h.pc;
    out.ctx = h.ctx;

    if (h.waiting) {
        if (!wake_condition(h)) {
            out.kind = StepKind::waiting;
            return out;
        }
        h.waiting = false;
    }

    if (auto irq = pick_interrupt(h)) {
        TrapInfo info{*irq, 0, std::nullopt, h.pc, false};
        return enter_trap(h, info, out);
    }

    uint32_t raw = 0;
    if (injected) {
        raw = *injected;
    } else {
        AccessRequest req;
        req.va = h.pc;
        req.kind = AccessKind::fetch;
        req.priv = h.ctx.priv;
        req.virt = h.ctx.virt;
        if (h.pc % 4) {
            TrapInfo t = mem_fault(Exception::InstructionAddressMisaligned, h.pc, h.ctx.virt);
            t.pc = h.pc;
            return enter_trap(h, t, out);
        }
        auto pa = tlb_lookup_or_fill(req, h.csrs, bus_, h.tlb);
        if (!pa) {
            TrapInfo t = pa.trap();
            t.pc = h.pc;
            return enter_trap(h, t, out);
        }
        auto word = bus_.read(pa->pa, 4);
        if (!word) {
            TrapInfo t = mem_fault(Exception::InstructionAccessFault, h.pc, h.ctx.virt);
            t.pc = h.pc;
            return enter_trap(h, t, out);
        }
        raw = static_cast<uint32_t>(*word);
    }
    out.raw = raw;

    auto in = decode(raw);
    if (!in) {
        TrapInfo t = TrapInfo::of(Exception::IllegalInstruction, raw);
        t.pc = h.pc;
        return enter_trap(h, t, out);
    }

    addr_t next_pc = h.pc + 4;
    if (MaybeTrap t = exec(h, *in, next_pc)) {
        t->pc = out.pc;
        if ((t->cause.is(Exception::IllegalInstruction) || t->cause.is(Exception::VirtualInstruction)) &&
            t->tval == 0)
            t->tval = raw;
        return enter_trap(h, *t, out);
    }
    h.pc = next_pc;
    ++h.instret;
    ++h.stats.retired[static_cast<size_t>(mode_index(out.ctx))];
    out.kind = StepKind::retired;
    if (step_hook_) step_hook_(h.hart_id, out);
    return out;
}

AccessRequest Machine::data_request(const HartState& h, addr_t va, AccessKind kind) const {
    const CsrFile& c = h.csrs;
    PrivilegeContext eff = h.ctx;
    if (h.ctx.is_m() && (c.mstatus & status::MPRV)) {
        eff.priv = static_cast<Priv>((c.mstatus & status::MPP) >> status::MPP_SHIFT);
        eff.virt = (c.mstatus & status::MPV) && eff.priv != Priv::M;
    }
    AccessRequest req;
    req.va = va;
    req.kind = kind;
    req.priv = eff.priv;
    req.virt = eff.virt;
    if (eff.virt) {
        req.sum = c.vsstatus & status::SUM;
        req.mxr = (c.vsstatus & status::MXR) || (c.mstatus & status::MXR);
    } else {
        req.sum = c.mstatus & status::SUM;
        req.mxr = c.mstatus & status::MXR;
    }
    return req;
}

AccessRequest Machine::hyp_request(const HartState& h, addr_t va, AccessKind kind, bool hlvx) const {
    const CsrFile& c = h.csrs;
    AccessRequest req;
    req.va = va;
    req.kind = kind;
    req.priv = (c.hstatus & hstatus_bits::SPVP) ? Priv::S : Priv::U;
    req.virt = true;
    req.hlvx = hlvx;
    req.sum = c.vsstatus & status::SUM;
    req.mxr = (c.vsstatus & status::MXR) || (c.mstatus & status::MXR);
    return req;
}

Result<addr_t> Machine::translate_data(HartState& h, const AccessRequest& req, unsigned width) {
    if (req.va % width) return mem_fault(misaligned_for(req.kind), req.va, req.virt);
    auto t = tlb_lookup_or_fill(req, h.csrs, bus_, h.tlb);
    if (!t) return t.trap();
    return t->pa;
}

Result<uint64_t> Machine::load(HartState& h, const AccessRequest& req, unsigned width) {
    auto pa = translate_data(h, req, width);
    if (!pa) return pa.trap();
    auto v = bus_.read(*pa, width);
    if (!v) return mem_fault(Exception::LoadAccessFault, req.va, req.virt);
    return *v;
}

MaybeTrap Machine::store(HartState& h, const AccessRequest& req, unsigned width, uint64_t value) {
    auto pa = translate_data(h, req, width);
    if (!pa) return pa.trap();
    if (!bus_.write(*pa, width, value)) return mem_fault(Exception::StoreAmoAccessFault, req.va, req.virt);
    invalidate_reservations(*pa);
    return std::nullopt;
}

void Machine::invalidate_reservations(addr_t pa) {
    for (HartState& other : harts_)
        if (other.reservation && (*other.reservation & ~addr_t{7}) == (pa & ~addr_t{7}))
            other.reservation.reset();
}

MaybeTrap Machine::amo(HartState& h, const Instruction& in) {
    const bool word = in.op <= Op::amomaxu_w;
    const unsigned width = word ? 4 : 8;
    const addr_t va = h.x[in.rs1];

    if (in.op == Op::lr_w || in.op == Op::lr_d) {
        auto req = data_request(h, va, AccessKind::load);
        auto pa = translate_data(h, req, width);
        if (!pa) return pa.trap();
        if (!bus_.ram.contains(*pa, width)) return mem_fault(Exception::LoadAccessFault, va, req.virt);
        const uint64_t v = bus_.ram.load(*pa, width);
        h.reservation = *pa;
        h.x.write(in.rd, sext_width(v, width));
        return std::nullopt;
    }

    auto req = data_request(h, va, AccessKind::store);
    auto pa = translate_data(h, req, width);
    if (!pa) return pa.trap();
    if (!bus_.ram.contains(*pa, width)) return mem_fault(Exception::StoreAmoAccessFault, va, req.virt);

    if (in.op == Op::sc_w || in.op == Op::sc_d) {
        const bool ok = h.reservation && *h.reservation == *pa;
        h.reservation.reset();
        if (ok) {
            bus_.ram.store(*pa, width, h.x[in.rs2]);
            invalidate_reservations(*pa);
        }
        h.x.write(in.rd, ok ? 0 : 1);
        return std::nullopt;
    }

    const uint64_t old = sext_width(bus_.ram.load(*pa, width), width);
    const uint64_t src = word ? sext_width(h.x[in.rs2], 4) : h.x[in.rs2];
    const auto so = static_cast<int64_t>(old);
    const auto ss = static_cast<int64_t>(src);
    uint64_t nv = 0;
    switch (in.op) {
    case Op::amoswap_w: case Op::amoswap_d: nv = src; break;
    case Op::amoadd_w: case Op::amoadd_d: nv = old + src; break;
    case Op::amoxor_w: case Op::amoxor_d: nv = old ^ src; break;
    case Op::amoand_w: case Op::amoand_d: nv = old & src; break;
    case Op::amoor_w: case Op::amoor_d: nv = old | src; break;
    case Op::amomin_w: case Op::amomin_d: nv = static_cast<uint64_t>(std::min(so, ss)); break;
    case Op::amomax_w: case Op::amomax_d: nv = static_cast<uint64_t>(std::max(so, ss)); break;
    case Op::amominu_w: case Op::amominu_d:
        nv = word ? std::min<uint32_t>(static_cast<uint32_t>(old), static_cast<uint32_t>(src)) : std::min(old, src);
        break;
    case Op::amomaxu_w: case Op::amomaxu_d:
        nv = word ? std::max<uint32_t>(static_cast<uint32_t>(old), static_cast<uint32_t>(src)) : std::max(old, src);
        break;
    default: break;
    }
    bus_.ram.store(*pa, width, nv);
    invalidate_reservations(*pa);
    h.x.write(in.rd, old);
    return std::nullopt;
}

MaybeTrap Machine::exec(HartState& h, const Instruction& in, addr_t& next_pc) {
    RegisterFile& x = h.x;
    const reg_t a = x[in.rs1];
    const reg_t b = x[in.rs2];
    const auto sa = static_cast<int64_t>(a);
    const auto sb = static_cast<int64_t>(b);
    const auto imm = static_cast<uint64_t>(in.imm);
    const PrivilegeContext ctx = h.ctx;
    CsrFile& c = h.csrs;
    const TrapInfo illegal = TrapInfo::of(Exception::IllegalInstruction, in.raw);
    const TrapInfo virt_insn = TrapInfo::of(Exception::VirtualInstruction, in.raw);

    auto branch = [&](bool taken) -> MaybeTrap {
        if (!taken) return std::nullopt;
        const addr_t target = h.pc + imm;
        if (target % 4) return mem_fault(Exception::InstructionAddressMisaligned, target, false);
        next_pc = target;
        return std::nullopt;
    };

    switch (in.op) {
    case Op::lui: x.write(in.rd, imm); break;
    case Op::auipc: x.write(in.rd, h.pc + imm); break;
    case Op::jal: {
        const addr_t target = h.pc + imm;
        if (target % 4) return mem_fault(Exception::InstructionAddressMisaligned, target, false);
        x.write(in.rd, h.pc + 4);
        next_pc = target;
        break;
    }
    case Op::jalr: {
        const addr_t target = (a + imm) & ~addr_t{1};
        if (target % 4) return mem_fault(Exception::InstructionAddressMisaligned, target, false);
        x.write(in.rd, h.pc + 4);
        next_pc = target;
        break;
    }
    case Op::beq: return branch(a == b);
    case Op::bne: return branch(a != b);
    case Op::blt: return branch(sa < sb);
    case Op::bge: return branch(sa >= sb);
    case Op::bltu: return branch(a < b);
    case Op::bgeu: return branch(a >= b);

    case Op::lb: case Op::lh: case Op::lw: case Op::ld:
    case Op::lbu: case Op::lhu: case Op::lwu: {
        const unsigned w = load_width(in.op);
        auto v = load(h, data_request(h, a + imm, AccessKind::load), w);
        if (!v) return v.trap();
        x.write(in.rd, load_signed(in.op) ? sext_width(*v, w) : *v);
        break;
    }
    case Op::sb: case Op::sh: case Op::sw: case Op::sd: {
        const unsigned w = load_width(in.op);
        if (auto t = store(h, data_request(h, a + imm, AccessKind::store), w, b)) return t;
        break;
    }

    case Op::addi: x.write(in.rd, a + imm); break;
    case Op::slti: x.write(in.rd, sa < in.imm); break;
    case Op::sltiu: x.write(in.rd, a < imm); break;
    case Op::xori: x.write(in.rd, a ^ imm); break;
    case Op::ori: x.write(in.rd, a | imm); break;
    case Op::andi: x.write(in.rd, a & imm); break;
    case Op::slli: x.write(in.rd, a << in.imm); break;
    case Op::srli: x.write(in.rd, a >> in.imm); break;
    case Op::srai: x.write(in.rd, static_cast<uint64_t>(sa >> in.imm)); break;
    case Op::add: x.write(in.rd, a + b); break;
    case Op::sub: x.write(in.rd, a - b); break;
    case Op::sll: x.write(in.rd, a << (b & 63)); break;
    case Op::slt: x.write(in.rd, sa < sb); break;
    case Op::sltu: x.write(in.rd, a < b); break;
    case Op::xor_: x.write(in.rd, a ^ b); break;
    case Op::srl: x.write(in.rd, a >> (b & 63)); break;
    case Op::sra: x.write(in.rd, static_cast<uint64_t>(sa >> (b & 63))); break;
    case Op::or_: x.write(in.rd, a | b); break;
    case Op::and_: x.write(in.rd, a & b); break;
    case Op::addiw: x.write(in.rd, sext32(a + imm)); break;
    case Op::slliw: x.write(in.rd, sext32(a << in.imm)); break;
    case Op::srliw: x.write(in.rd, sext32(static_cast<uint32_t>(a) >> in.imm)); break;
    case Op::sraiw: x.write(in.rd, static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(a) >> in.imm))); break;
    case Op::addw: x.write(in.rd, sext32(a + b)); break;
    case Op::subw: x.write(in.rd, sext32(a - b)); break;
    case Op::sllw: x.write(in.rd, sext32(a << (b & 31))); break;
    case Op::srlw: x.write(in.rd, sext32(static_cast<uint32_t>(a) >> (b & 31))); break;
    case Op::sraw: x.write(in.rd, static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(a) >> (b & 31)))); break;

    case Op::mul: x.write(in.rd, a * b); break;
    case Op::mulh: x.write(in.rd, static_cast<uint64_t>((static_cast<__int128>(sa) * sb) >> 64)); break;
    case Op::mulhsu:
        x.write(in.rd, static_cast<uint64_t>((static_cast<__int128>(sa) * static_cast<__int128>(b)) >> 64));
        break;
    case Op::mulhu:
        x.write(in.rd, static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) >> 64));
        break;
    case Op::div: x.write(in.rd, div_s(sa, sb)); break;
    case Op::divu: x.write(in.rd, div_u(a, b)); break;
    case Op::rem: x.write(in.rd, rem_s(sa, sb)); break;
    case Op::remu: x.write(in.rd, rem_u(a, b)); break;
    case Op::mulw: x.write(in.rd, sext32(a * b)); break;
    case Op::divw: x.write(in.rd, sext32(div_s(sext32(a), sext32(b)))); break;
    case Op::divuw: x.write(in.rd, sext32(div_u(static_cast<uint32_t>(a), static_cast<uint32_t>(b)))); break;
    case Op::remw: x.write(in.rd, sext32(rem_s(sext32(a), sext32(b)))); break;
    case Op::remuw: x.write(in.rd, sext32(rem_u(static_cast<uint32_t>(a), static_cast<uint32_t>(b)))); break;

    case Op::lr_w: case Op::sc_w: case Op::amoswap_w: case Op::amoadd_w: case Op::amoxor_w:
    case Op::amoand_w: case Op::amoor_w: case Op::amomin_w: case Op::amomax_w: case Op::amominu_w:
    case Op::amomaxu_w: case Op::lr_d: case Op::sc_d: case Op::amoswap_d: case Op::amoadd_d:
    case Op::amoxor_d: case Op::amoand_d: case Op::amoor_d: case Op::amomin_d: case Op::amomax_d:
    case Op::amominu_d: case Op::amomaxu_d:
        return amo(h, in);

    case Op::fence:
    case Op::fence_i: break;

    case Op::ecall: {
        Exception e = Exception::EcallFromM;
        if (ctx.priv == Priv::U) e = Exception::EcallFromU;
        else if (ctx.is_hs()) e = Exception::EcallFromS;
        else if (ctx.is_vs())
            e = has_mutation(c.mutations, Mutation::ecall_vs_cause) ? Exception::EcallFromS : Exception::EcallFromVS;
        return TrapInfo::of(e);
    }
    case Op::ebreak: return TrapInfo::of(Exception::Breakpoint, h.pc);
    case Op::sret:
    case Op::mret: {
        if (auto t = execute_xret(h, in.op == Op::mret ? XretKind::mret : XretKind::sret)) {
            t->tval = in.raw;
            return t;
        }
        next_pc = h.pc;
        break;
    }
    case Op::wfi:
        if (!wake_condition(h)) h.waiting = true;
        break;
    case Op::sfence_vma:
        if (ctx.is_vu()) return virt_insn;
        if (ctx.is_u()) return illegal;
        if (ctx.is_hs() && (c.mstatus & status::TVM)) return illegal;
        if (ctx.is_vs() && (c.hstatus & hstatus_bits::VTVM)) return virt_insn;
        if (ctx.virt) h.tlb.flush_guest(true);
        else fence(FenceKind::sfence_vma, h.tlb, c.mutations);
        break;
    case Op::hfence_vvma:
    case Op::hfence_gvma:
        if (ctx.virt) return virt_insn;
        if (ctx.is_u()) return illegal;
        if (in.op == Op::hfence_gvma && ctx.is_hs() && (c.mstatus & status::TVM)) return illegal;
        fence(in.op == Op::hfence_vvma ? FenceKind::hfence_vvma : FenceKind::hfence_gvma, h.tlb, c.mutations);
        break;

    case Op::csrrw: case Op::csrrs: case Op::csrrc:
    case Op::csrrwi: case Op::csrrsi: case Op::csrrci: {
        const bool imm_form = in.op == Op::csrrwi || in.op == Op::csrrsi || in.op == Op::csrrci;
        const reg_t operand = imm_form ? in.rs1 : a;
        CsrOp op = CsrOp::write;
        if (in.op == Op::csrrs || in.op == Op::csrrsi) op = in.rs1 == 0 ? CsrOp::read : CsrOp::set;
        if (in.op == Op::csrrc || in.op == Op::csrrci) op = in.rs1 == 0 ? CsrOp::read : CsrOp::clear;
        auto r = csr_access(h, bus_.clint, static_cast<uint16_t>(in.imm), op, operand);
        if (!r) {
            TrapInfo t = r.trap();
            t.tval = in.raw;
            return t;
        }
        x.write(in.rd, *r);
        break;
    }

    case Op::hlv_b: case Op::hlv_bu: case Op::hlv_h: case Op::hlv_hu: case Op::hlvx_hu:
    case Op::hlv_w: case Op::hlv_wu: case Op::hlvx_wu: case Op::hlv_d: {
        if (ctx.virt) return virt_insn;
        if (ctx.is_u() && !(c.hstatus & hstatus_bits::HU)) return illegal;
        const bool hlvx = in.op == Op::hlvx_hu || in.op == Op::hlvx_wu;
        const unsigned w = load_width(in.op);
        auto v = load(h, hyp_request(h, a, AccessKind::load, hlvx), w);
        if (!v) return v.trap();
        x.write(in.rd, load_signed(in.op) ? sext_width(*v, w) : *v);
        break;
    }
    case Op::hsv_b: case Op::hsv_h: case Op::hsv_w: case Op::hsv_d: {
        if (ctx.virt) return virt_insn;
        if (ctx.is_u() && !(c.hstatus & hstatus_bits::HU)) return illegal;
        if (auto t = store(h, hyp_request(h, a, AccessKind::store, false), load_width(in.op), b)) return t;
        break;
    }
    case Op::count_: return illegal;
    }
    return std::nullopt;
}

} // namespace hvsim
