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

#include <optional>
#include <string_view>

#include "hvsim/trap.hpp"
#include "hvsim/types.hpp"

namespace hvsim {

class Clint;
struct HartState;

namespace csr {

// Supervisor
inline constexpr uint16_t sstatus = 0x100;
inline constexpr uint16_t sie = 0x104;
inline constexpr uint16_t stvec = 0x105;
inline constexpr uint16_t scounteren = 0x106;
inline constexpr uint16_t sscratch = 0x140;
inline constexpr uint16_t sepc = 0x141;
inline constexpr uint16_t scause = 0x142;
inline constexpr uint16_t stval = 0x143;
inline constexpr uint16_t sip = 0x144;
inline constexpr uint16_t satp = 0x180;

// Virtual supervisor (shadows of the above while V=1)
inline constexpr uint16_t vsstatus = 0x200;
inline constexpr uint16_t vsie = 0x204;
inline constexpr uint16_t vstvec = 0x205;
inline constexpr uint16_t vsscratch = 0x240;
inline constexpr uint16_t vsepc = 0x241;
inline constexpr uint16_t vscause = 0x242;
inline constexpr uint16_t vstval = 0x243;
inline constexpr uint16_t vsip = 0x244;
inline constexpr uint16_t vsatp = 0x280;

// Hypervisor
inline constexpr uint16_t hstatus = 0x600;
inline constexpr uint16_t hedeleg = 0x602;
inline constexpr uint16_t hideleg = 0x603;
inline constexpr uint16_t hie = 0x604;
inline constexpr uint16_t htimedelta = 0x605;
inline constexpr uint16_t hcounteren = 0x606;
inline constexpr uint16_t hgeie = 0x607;
inline constexpr uint16_t htval = 0x643;
inline constexpr uint16_t hip = 0x644;
inline constexpr uint16_t hvip = 0x645;
inline constexpr uint16_t htinst = 0x64A;
inline constexpr uint16_t hgatp = 0x680;
inline constexpr uint16_t hgeip = 0xE12;

// Machine
inline constexpr uint16_t mstatus = 0x300;
inline constexpr uint16_t misa = 0x301;
inline constexpr uint16_t medeleg = 0x302;
inline constexpr uint16_t mideleg = 0x303;
inline constexpr uint16_t mie = 0x304;
inline constexpr uint16_t mtvec = 0x305;
inline constexpr uint16_t mscratch = 0x340;
inline constexpr uint16_t mepc = 0x341;
inline constexpr uint16_t mcause = 0x342;
inline constexpr uint16_t mtval = 0x343;
inline constexpr uint16_t mip = 0x344;
inline constexpr uint16_t mtinst = 0x34A;
inline constexpr uint16_t mtval2 = 0x34B;
inline constexpr uint16_t mhartid = 0xF14;

// Unprivileged counters
inline constexpr uint16_t cycle = 0xC00;
inline constexpr uint16_t time = 0xC01;
inline constexpr uint16_t instret = 0xC02;

std::optional<std::string_view> name(uint16_t addr);
std::optional<uint16_t> lookup(std::string_view name);
bool implemented(uint16_t addr);

} // namespace csr

// mstatus / sstatus / vsstatus fields.
namespace status {
inline constexpr reg_t SIE = 1ull << 1;
inline constexpr reg_t MIE = 1ull << 3;
inline constexpr reg_t SPIE = 1ull << 5;
inline constexpr reg_t MPIE = 1ull << 7;
inline constexpr reg_t SPP = 1ull << 8;
inline constexpr reg_t MPP = 3ull << 11;
inline constexpr unsigned MPP_SHIFT = 11;
inline constexpr reg_t MPRV = 1ull << 17;
inline constexpr reg_t SUM = 1ull << 18;
inline constexpr reg_t MXR = 1ull << 19;
inline constexpr reg_t TVM = 1ull << 20;
inline constexpr reg_t TSR = 1ull << 22;
inline constexpr reg_t UXL = 3ull << 32;
inline constexpr reg_t SXL = 3ull << 34;
inline constexpr reg_t GVA = 1ull << 38;
inline constexpr reg_t MPV = 1ull << 39;
inline constexpr reg_t XLEN64 = 2ull;
} // namespace status

namespace hstatus_bits {
inline constexpr reg_t GVA = 1ull << 6;
inline constexpr reg_t SPV = 1ull << 7;
inline constexpr reg_t SPVP = 1ull << 8;
inline constexpr reg_t HU = 1ull << 9;
inline constexpr reg_t VGEIN = 0x3Full << 12;
inline constexpr unsigned VGEIN_SHIFT = 12;
inline constexpr reg_t VTVM = 1ull << 20;
inline constexpr reg_t VTSR = 1ull << 22;
inline constexpr reg_t VSXL = 3ull << 32;
} // namespace hstatus_bits

namespace irq {
constexpr reg_t bit(Interrupt i) noexcept { return 1ull << static_cast<unsigned>(i); }
inline constexpr reg_t SSIP = bit(Interrupt::SupervisorSoftware);
inline constexpr reg_t VSSIP = bit(Interrupt::VirtualSupervisorSoftware);
inline constexpr reg_t MSIP = bit(Interrupt::MachineSoftware);
inline constexpr reg_t STIP = bit(Interrupt::SupervisorTimer);
inline constexpr reg_t VSTIP = bit(Interrupt::VirtualSupervisorTimer);
inline constexpr reg_t MTIP = bit(Interrupt::MachineTimer);
inline constexpr reg_t SEIP = bit(Interrupt::SupervisorExternal);
inline constexpr reg_t VSEIP = bit(Interrupt::VirtualSupervisorExternal);
inline constexpr reg_t MEIP = bit(Interrupt::MachineExternal);
inline constexpr reg_t SGEIP = bit(Interrupt::SupervisorGuestExternal);

inline constexpr reg_t S_BITS = SSIP | STIP | SEIP;
inline constexpr reg_t VS_BITS = VSSIP | VSTIP | VSEIP;
inline constexpr reg_t M_BITS = MSIP | MTIP | MEIP;
inline constexpr reg_t ALL = S_BITS | VS_BITS | M_BITS | SGEIP;
} // namespace irq

namespace atp {
inline constexpr unsigned MODE_SHIFT = 60;
inline constexpr reg_t MODE_BARE = 0;
inline constexpr reg_t MODE_SV39 = 8;   // satp / vsatp
inline constexpr reg_t MODE_SV39X4 = 8; // hgatp
inline constexpr reg_t PPN_MASK = (1ull << 44) - 1;

constexpr reg_t mode(reg_t value) noexcept { return value >> MODE_SHIFT; }
constexpr reg_t ppn(reg_t value) noexcept { return value & PPN_MASK; }
constexpr reg_t make(reg_t mode, reg_t ppn) noexcept {
    return (mode << MODE_SHIFT) | (ppn & PPN_MASK);
}
} // namespace atp

// Interrupt lines driven by devices (CLINT, PLIC). They feed the read-only
// parts of mip/hip/hgeip.
struct HardwareLines {
    bool msip = false;
    bool mtip = false;
    bool stip = false;
    bool vstip = false;
    bool meip = false;
    bool seip = false;
    // Bit i set when VS external context i of this hart asserts (bit 0 unused).
    uint64_t hgeip = 0;

    friend bool operator==(const HardwareLines&, const HardwareLines&) = default;
};

// Raw CSR storage. Registers that are views (sstatus, sie, sip, hip, hie,
// vsip, vsie) have no storage of their own; read them through the accessors.
struct CsrFile {
    unsigned geilen = 0;
    MutationSet mutations = 0;
    HardwareLines hw;

    // machine
    reg_t mstatus = (status::XLEN64 << 32) | (status::XLEN64 << 34);
    reg_t medeleg = 0;
    reg_t mideleg_sw = 0; // writable part, see mideleg()
    reg_t mie = 0;
    reg_t mip_sw = 0; // SSIP and the software SEIP bit
    reg_t mtvec = 0;
    reg_t mscratch = 0;
    reg_t mepc = 0;
    reg_t mcause = 0;
    reg_t mtval = 0;
    reg_t mtval2 = 0;
    reg_t mtinst = 0;

    // hypervisor
    reg_t hstatus = status::XLEN64 << 32;
    reg_t hedeleg = 0;
    reg_t hideleg = 0;
    reg_t hvip = 0;
    reg_t hgeie = 0;
    reg_t hgatp = 0;
    reg_t htval = 0;
    reg_t htinst = 0;
    reg_t hcounteren = 0;

    // supervisor
    reg_t stvec = 0;
    reg_t sscratch = 0;
    reg_t sepc = 0;
    reg_t scause = 0;
    reg_t stval = 0;
    reg_t satp = 0;
    reg_t scounteren = 0;

    // virtual supervisor
    reg_t vsstatus = status::XLEN64 << 32;
    reg_t vstvec = 0;
    reg_t vsscratch = 0;
    reg_t vsepc = 0;
    reg_t vscause = 0;
    reg_t vstval = 0;
    reg_t vsatp = 0;

    unsigned vgein() const noexcept {
        return static_cast<unsigned>((hstatus & hstatus_bits::VGEIN) >> hstatus_bits::VGEIN_SHIFT);
    }

    reg_t mideleg() const noexcept;
    reg_t mip() const noexcept;
    reg_t hip() const noexcept;
    reg_t hie() const noexcept { return mie & (irq::VS_BITS | irq::SGEIP); }
    reg_t hgeip() const noexcept { return hw.hgeip & geie_mask(); }
    reg_t geie_mask() const noexcept;
    reg_t sip() const noexcept;
    reg_t sie() const noexcept;
    reg_t vsip() const noexcept;
    reg_t vsie() const noexcept;
};

enum class CsrOp : uint8_t { read, write, set, clear };

// Executes a CSR instruction's access from the hart's current privilege
// context. Returns the prior value, or the trap the access raises (not taken).
Result<reg_t> csr_access(HartState& hart, Clint& clint, uint16_t addr, CsrOp op, reg_t operand);

// Unchecked accessors with full WARL filtering and view composition, as seen
// from M-mode. Used by the harness and tests to poke state directly.
reg_t csr_peek(const HartState& hart, const Clint& clint, uint16_t addr);
void csr_poke(HartState& hart, Clint& clint, uint16_t addr, reg_t value);

enum class InterruptViewKind : uint8_t { m, s, vs, h };

struct InterruptPair {
    reg_t pending = 0;
    reg_t enabled = 0;
    friend bool operator==(const InterruptPair&, const InterruptPair&) = default;
};

InterruptPair interrupt_view(const CsrFile& csrs, InterruptViewKind view);

} // namespace hvsim
