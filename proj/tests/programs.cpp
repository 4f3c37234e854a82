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

#include "programs.hpp"

#include "hvsim/csr.hpp"
#include "hvsim/harness.hpp"

namespace programs {

using namespace hvsim;

namespace {
constexpr unsigned t0 = 5, t1 = 6, t2 = 7, s0 = 8, s1 = 9, s2 = 18, s3 = 19, s4 = 20;
}

std::vector<uint8_t> timer_demo(const MemoryMap& map, unsigned interrupts) {
    Assembler a(map.ram_base);
    a.emit(rv::csrr(t0, csr::mhartid));
    a.branch_to(Op::bne, t0, 0, "park");

    a.li(s0, map.clint_base);
    a.li(s1, 0);
    a.li(s2, interrupts);
    a.li(s3, 0);
    a.la(t1, "handler");
    a.emit(rv::csrw(csr::mtvec, t1));
    a.li(t1, Clint::kMtime);
    a.emit(rv::r(Op::add, t1, t1, s0));
    a.emit(rv::i(Op::ld, t2, t1, 0));
    a.emit(rv::addi(t2, t2, 50));
    a.li(t1, Clint::kMtimecmp);
    a.emit(rv::r(Op::add, t1, t1, s0));
    a.emit(rv::s(Op::sd, t1, t2, 0));
    a.li(t1, irq::MTIP);
    a.emit(rv::csrw(csr::mie, t1));
    a.emit(rv::csr(Op::csrrsi, 0, csr::mstatus, 8));

    a.label("loop");
    a.emit(rv::addi(s3, s3, 3));
    a.emit(rv::r(Op::mul, s4, s3, s3));
    a.emit(rv::r(Op::xor_, s4, s4, s3));
    a.branch_to(Op::blt, s1, s2, "loop");

    a.emit(rv::csr(Op::csrrci, 0, csr::mstatus, 8));
    a.li(t0, map.exit_base);
    a.emit(rv::r(Op::add, t1, s1, s1));
    a.emit(rv::addi(t1, t1, 1));
    a.emit(rv::s(Op::sd, t0, t1, HostExit::kExit));

    a.label("park");
    a.emit(rv::fixed(Op::wfi));
    a.jal_to(0, "park");

    // Handler: rearm 37 ticks out, count, print.
    a.label("handler");
    a.li(t1, Clint::kMtime);
    a.emit(rv::r(Op::add, t1, t1, s0));
    a.emit(rv::i(Op::ld, t2, t1, 0));
    a.emit(rv::addi(t2, t2, 37));
    a.li(t1, Clint::kMtimecmp);
    a.emit(rv::r(Op::add, t1, t1, s0));
    a.emit(rv::s(Op::sd, t1, t2, 0));
    a.emit(rv::addi(s1, s1, 1));
    a.li(t1, map.exit_base + HostExit::kPutc);
    a.emit(rv::addi(t2, s1, 'a' - 1));
    a.emit(rv::s(Op::sd, t1, t2, 0));
    a.emit(rv::fixed(Op::mret));
    return a.finish();
}

std::vector<uint8_t> exit_with(const MemoryMap& map, unsigned code) {
    Assembler a(map.ram_base);
    a.li(t0, map.exit_base);
    a.li(t1, (static_cast<uint64_t>(code) << 1) | 1);
    a.emit(rv::s(Op::sd, t0, t1, HostExit::kExit));
    a.label("hang");
    a.jal_to(0, "hang");
    return a.finish();
}

std::vector<uint8_t> spin(const MemoryMap& map) {
    Assembler a(map.ram_base);
    a.label("top");
    a.emit(rv::addi(t0, t0, 1));
    a.jal_to(0, "top");
    return a.finish();
}

} // namespace programs
