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

#include "hvsim/bench.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hvsim/harness.hpp"

namespace hvsim {

namespace {

// Register names used by the generated code.
constexpr unsigned sp = 2, t0 = 5, t1 = 6, t2 = 7, s0 = 8, s1 = 9, a0 = 10, s2 = 18, s3 = 19;

// Guest-physical page where the guest expects its interrupt controller
// context. Mapped onto a VS context in direct mode, left unmapped otherwise.
constexpr addr_t kGuestPlic = 0x0C40'0000;

constexpr addr_t kGuestCode = 0x20'0000;   // offsets from the RAM base
constexpr addr_t kShimCode = 0x30'0000;
constexpr addr_t kSamples = 0x40'0000;
constexpr addr_t kSaveArea = 0x50'0000;

constexpr uint64_t kLoadGuestFault = 21;
constexpr uint64_t kStoreGuestFault = 23;

struct Image {
    std::vector<uint8_t> bytes;
    addr_t handler = 0;
};

Image guest_image(addr_t base, uint64_t period, addr_t exit_base) {
    Assembler a(base);
    // entry: start the timer, then spin
    a.li(t0, period);
    a.emit(rv::s(Op::sd, s0, t0, BenchTimer::kPeriod));
    a.li(t0, 1);
    a.emit(rv::s(Op::sd, s0, t0, BenchTimer::kControl));
    a.label("spin");
    a.jal_to(0, "spin");

    a.label("handler");
    a.emit(rv::i(Op::ld, t0, s0, BenchTimer::kCounter));
    a.emit(rv::s(Op::sd, s1, t0, 0));
    a.emit(rv::i(Op::lw, a0, s2, 4)); // claim
    a.emit(rv::s(Op::sd, s1, a0, 8));
    a.emit(rv::s(Op::sd, s0, t0, BenchTimer::kAck));
    a.emit(rv::s(Op::sw, s2, a0, 4)); // complete
    a.emit(rv::addi(s1, s1, 16));
    a.emit(rv::addi(s3, s3, -1));
    a.branch_to(Op::beq, s3, 0, "done");
    a.emit(rv::fixed(Op::sret));

    a.label("done");
    a.li(t0, exit_base);
    a.li(t1, 1); // exit code 0
    a.emit(rv::s(Op::sd, t0, t1, HostExit::kExit));
    a.label("hang");
    a.jal_to(0, "hang");
    Image img;
    img.bytes = a.finish();
    img.handler = a.address_of("handler");
    return img;
}

// HS handler for trap_emulate mode.
std::vector<uint8_t> shim_image(addr_t base, addr_t s_claim, addr_t exit_base) {
    Assembler a(base);
    a.emit(rv::csr(Op::csrrw, sp, csr::sscratch, sp));
    a.emit(rv::s(Op::sd, sp, t0, 0));
    a.emit(rv::s(Op::sd, sp, t1, 8));
    a.emit(rv::s(Op::sd, sp, t2, 16));
    a.emit(rv::csrr(t0, csr::scause));
    a.branch_to(Op::blt, t0, 0, "irq");
    a.li(t1, kLoadGuestFault);
    a.branch_to(Op::beq, t0, t1, "claim");
    a.li(t1, kStoreGuestFault);
    a.branch_to(Op::bne, t0, t1, "fail");

    // emulated complete: forward the saved id
    a.li(t1, s_claim);
    a.emit(rv::i(Op::ld, t2, sp, 24));
    a.emit(rv::s(Op::sw, t1, t2, 0));
    a.jal_to(0, "skip");

    // emulated claim: the guest claims into a0 by convention
    a.label("claim");
    a.emit(rv::i(Op::ld, a0, sp, 24));
    a.li(t1, irq::VSEIP);
    a.emit(rv::csr(Op::csrrc, 0, csr::hvip, t1));

    a.label("skip");
    a.emit(rv::csrr(t0, csr::sepc));
    a.emit(rv::addi(t0, t0, 4));
    a.emit(rv::csrw(csr::sepc, t0));
    a.jal_to(0, "out");

    a.label("irq");
    a.li(t1, s_claim);
    a.emit(rv::i(Op::lwu, t2, t1, 0));
    a.emit(rv::s(Op::sd, sp, t2, 24));
    a.li(t1, irq::VSEIP);
    a.emit(rv::csr(Op::csrrs, 0, csr::hvip, t1));

    a.label("out");
    a.emit(rv::i(Op::ld, t0, sp, 0));
    a.emit(rv::i(Op::ld, t1, sp, 8));
    a.emit(rv::i(Op::ld, t2, sp, 16));
    a.emit(rv::csr(Op::csrrw, sp, csr::sscratch, sp));
    a.emit(rv::fixed(Op::sret));

    a.label("fail");
    a.li(t0, exit_base);
    a.li(t1, (2 << 1) | 1);
    a.emit(rv::s(Op::sd, t0, t1, HostExit::kExit));
    a.label("hang");
    a.jal_to(0, "hang");
    return a.finish();
}

} // namespace

const char* latency_mode_name(LatencyMode m) {
    return m == LatencyMode::direct ? "direct" : "trap-emulate";
}

std::optional<LatencyMode> latency_mode_from_name(const std::string& name) {
    if (name == "direct") return LatencyMode::direct;
    if (name == "trap-emulate" || name == "trap_emulate") return LatencyMode::trap_emulate;
    return std::nullopt;
}

double LatencyReport::mean_ticks() const {
    if (samples.empty()) return 0;
    double s = 0;
    for (const auto& x : samples) s += static_cast<double>(x.ticks);
    return s / static_cast<double>(samples.size());
}

double LatencyReport::stddev_ticks() const {
    if (samples.empty()) return 0;
    const double m = mean_ticks();
    double s = 0;
    for (const auto& x : samples) s += (static_cast<double>(x.ticks) - m) * (static_cast<double>(x.ticks) - m);
    return std::sqrt(s / static_cast<double>(samples.size()));
}

uint64_t LatencyReport::max_ticks() const {
    uint64_t m = 0;
    for (const auto& x : samples) m = std::max(m, x.ticks);
    return m;
}

double LatencyReport::mean_hs_traps() const {
    if (samples.empty()) return 0;
    double s = 0;
    for (const auto& x : samples) s += static_cast<double>(x.hs_traps);
    return s / static_cast<double>(samples.size());
}

double LatencyReport::mean_hs_instructions() const {
    if (samples.empty()) return 0;
    double s = 0;
    for (const auto& x : samples) s += static_cast<double>(x.hs_instructions);
    return s / static_cast<double>(samples.size());
}

LatencyReport run_latency(const LatencyOptions& opts) {
    LatencyReport rep;
    rep.mode = opts.mode;
    rep.discarded = opts.discard;
    if (opts.samples <= opts.discard || opts.samples > 0x10000) {
        rep.error = "sample count must exceed the discarded count and be at most 65536";
        return rep;
    }
    if (opts.period < 200) {
        rep.error = "period must be at least 200 ticks";
        return rep;
    }
    const unsigned total = opts.samples;

    MachineConfig cfg = opts.machine.value_or(Harness::default_config());
    cfg.harts = 1;
    cfg.mutations = opts.mutations;
    if (opts.mode == LatencyMode::direct && cfg.geilen == 0) {
        rep.error = "direct mode needs geilen >= 1";
        return rep;
    }
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        rep.error = e.what();
        return rep;
    }
    if (cfg.map.ram_size < kSaveArea + 0x1000 + 16ull * total) {
        rep.error = "benchmark needs at least 6 MiB of RAM";
        return rep;
    }
    Harness h(cfg);
    Machine& m = h.machine();
    Plic& plic = h.bus().plic;
    const MemoryMap& map = m.config().map;
    const addr_t ram = map.ram_base;
    const unsigned src = cfg.bench_irq;

    const addr_t guest_code = ram + kGuestCode;
    const Image guest = guest_image(guest_code, opts.period, map.exit_base);
    const addr_t handler = guest.handler;
    h.bus().load_image(guest.bytes, guest_code);

    // Stage 2: RAM as one identity gigapage, the timer and exit pages.
    Mapping r;
    r.va = ram & ~((1ull << 30) - 1);
    r.pa = r.va;
    r.s2 = kRWX | pte::U;
    r.s2_level = 2;
    r.stage1 = false;
    h.map(r);
    for (addr_t pg : {map.bench_base, map.exit_base}) {
        Mapping d;
        d.va = pg;
        d.pa = pg;
        d.s2 = kRW | pte::U;
        d.stage1 = false;
        h.map(d);
    }

    const unsigned s_ctx = plic.context_index(0, Plic::ContextKind::S);
    const unsigned vs_ctx = plic.context_index(0, Plic::ContextKind::VS, 1);
    plic.set_priority(src, 1);

    h.set_csr(csr::hideleg, irq::VSEIP);
    h.set_csr(csr::vstvec, handler);
    h.set_csr(csr::vsstatus, h.csr(csr::vsstatus) | status::SIE);

    if (opts.mode == LatencyMode::direct) {
        plic.set_enable(vs_ctx, src, true);
        Mapping p;
        p.va = kGuestPlic;
        p.pa = map.plic_base + plic.threshold_offset(vs_ctx);
        p.s2 = kRW | pte::U;
        p.stage1 = false;
        h.map(p);
        h.set_csr(csr::hstatus, 1ull << hstatus_bits::VGEIN_SHIFT);
        h.set_csr(csr::mie, irq::VSEIP);
    } else {
        plic.set_enable(s_ctx, src, true);
        const addr_t shim = ram + kShimCode;
        h.bus().load_image(shim_image(shim, map.plic_base + plic.claim_offset(s_ctx), map.exit_base), shim);
        h.set_csr(csr::medeleg, (1ull << kLoadGuestFault) | (1ull << kStoreGuestFault));
        h.set_csr(csr::mideleg, irq::SEIP);
        h.set_csr(csr::mie, irq::SEIP | irq::VSEIP);
        h.set_csr(csr::stvec, shim);
        h.set_csr(csr::sscratch, ram + kSaveArea);
    }

    h.set_reg(s0, map.bench_base);
    h.set_reg(s1, ram + kSamples);
    h.set_reg(s2, kGuestPlic);
    h.set_reg(s3, total);
    h.hart().pc = guest_code;
    h.goto_priv(kModeVS);

    std::vector<LatencySample> all(total);
    auto window = [&]() -> LatencySample* {
        const uint64_t n = h.bus().bench.assertions();
        if (n == 0 || n > total) return nullptr;
        return &all[n - 1];
    };
    m.set_trap_hook([&](const TrapEvent& ev) {
        if (ev.target == TrapTarget::M) ++rep.m_traps;
        if (ev.target != TrapTarget::HS) return;
        if (LatencySample* s = window()) ++s->hs_traps;
    });
    m.set_step_hook([&](unsigned, const StepOutcome& out) {
        if (out.kind != StepKind::retired || !(out.ctx == kModeHS)) return;
        if (LatencySample* s = window()) ++s->hs_instructions;
    });

    const uint64_t budget = (total + 2) * opts.period + 10'000;
    const RunResult res = m.run(budget);
    m.set_trap_hook(nullptr);
    m.set_step_hook(nullptr);

    if (res.stop != RunResult::Stop::exited) {
        rep.error = "benchmark did not finish within " + std::to_string(budget) + " steps";
        return rep;
    }
    rep.exit_code = res.exit_code;
    if (res.exit_code != 0) {
        rep.error = "benchmark guest exited with code " + std::to_string(res.exit_code);
        return rep;
    }
    if (rep.m_traps) {
        rep.error = "unexpected trap into M";
        return rep;
    }
    for (unsigned k = 0; k < total; ++k) {
        all[k].ticks = h.read_phys(ram + kSamples + 16ull * k);
        all[k].claimed_id = static_cast<uint32_t>(h.read_phys(ram + kSamples + 16ull * k + 8, 4));
        if (all[k].claimed_id != src) {
            rep.error = "sample " + std::to_string(k) + " claimed id " + std::to_string(all[k].claimed_id);
            return rep;
        }
    }
    rep.samples.assign(all.begin() + opts.discard, all.end());
    rep.completed = true;
    return rep;
}

void print_latency(std::ostream& os, const LatencyReport& r) {
    char buf[256];
    os << "mode " << latency_mode_name(r.mode) << "\n";
    if (!r.ok()) {
        os << "error: " << r.error << "\n";
        return;
    }
    std::snprintf(buf, sizeof buf,
                  "samples %zu (discarded %u)\nlatency ticks mean %.2f max %llu stddev %.3f\n"
                  "hs traps per interrupt %.2f\nhs instructions per interrupt %.2f\n",
                  r.samples.size(), r.discarded, r.mean_ticks(), static_cast<unsigned long long>(r.max_ticks()),
                  r.stddev_ticks(), r.mean_hs_traps(), r.mean_hs_instructions());
    os << buf;
}

void print_latency_samples(std::ostream& os, const LatencyReport& r) {
    char buf[128];
    for (size_t i = 0; i < r.samples.size(); ++i) {
        const auto& s = r.samples[i];
        std::snprintf(buf, sizeof buf, "%zu\t%llu\t%llu\t%llu\t%u\n", i, static_cast<unsigned long long>(s.ticks),
                      static_cast<unsigned long long>(s.hs_traps),
                      static_cast<unsigned long long>(s.hs_instructions), s.claimed_id);
        os << buf;
    }
}

} // namespace hvsim
