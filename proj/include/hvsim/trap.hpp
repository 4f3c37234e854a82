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
#include <string>
#include <utility>
#include <variant>

#include "hvsim/types.hpp"

namespace hvsim {

enum class Exception : uint8_t {
    InstructionAddressMisaligned = 0,
    InstructionAccessFault = 1,
    IllegalInstruction = 2,
    Breakpoint = 3,
    LoadAddressMisaligned = 4,
    LoadAccessFault = 5,
    StoreAmoAddressMisaligned = 6,
    StoreAmoAccessFault = 7,
    EcallFromU = 8, // also VU
    EcallFromS = 9, // HS
    EcallFromVS = 10,
    EcallFromM = 11,
    InstructionPageFault = 12,
    LoadPageFault = 13,
    StoreAmoPageFault = 15,
    InstructionGuestPageFault = 20,
    LoadGuestPageFault = 21,
    VirtualInstruction = 22,
    StoreAmoGuestPageFault = 23,
};

// Bit positions in mip/mie; also the interrupt cause codes.
enum class Interrupt : uint8_t {
    SupervisorSoftware = 1,
    VirtualSupervisorSoftware = 2,
    MachineSoftware = 3,
    SupervisorTimer = 5,
    VirtualSupervisorTimer = 6,
    MachineTimer = 7,
    SupervisorExternal = 9,
    VirtualSupervisorExternal = 10,
    MachineExternal = 11,
    SupervisorGuestExternal = 12,
};

struct TrapCause {
    bool is_interrupt = false;
    uint8_t code = 0;

    static constexpr TrapCause exception(Exception e) noexcept {
        return {false, static_cast<uint8_t>(e)};
    }
    static constexpr TrapCause interrupt(Interrupt i) noexcept {
        return {true, static_cast<uint8_t>(i)};
    }

    constexpr bool is(Exception e) const noexcept {
        return !is_interrupt && code == static_cast<uint8_t>(e);
    }
    constexpr bool is(Interrupt i) const noexcept {
        return is_interrupt && code == static_cast<uint8_t>(i);
    }

    constexpr bool is_guest_page_fault() const noexcept {
        return is(Exception::InstructionGuestPageFault) ||
               is(Exception::LoadGuestPageFault) ||
               is(Exception::StoreAmoGuestPageFault);
    }

    // Value written to xcause.
    constexpr reg_t encoded() const noexcept {
        return (static_cast<reg_t>(is_interrupt) << 63) | code;
    }

    friend constexpr bool operator==(TrapCause, TrapCause) = default;
};

std::string cause_name(TrapCause cause);

struct TrapInfo {
    TrapCause cause;
    reg_t tval = 0;
    // Guest-physical address, present only for guest page faults.
    std::optional<addr_t> gpa;
    addr_t pc = 0;
    // tval holds a guest virtual address (sets hstatus.GVA / mstatus.GVA).
    bool gva = false;

    static TrapInfo of(Exception e, reg_t tval = 0) {
        return TrapInfo{TrapCause::exception(e), tval, std::nullopt, 0, false};
    }
};

template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(TrapInfo trap) : v_(std::move(trap)) {}

    bool ok() const noexcept { return v_.index() == 0; }
    explicit operator bool() const noexcept { return ok(); }

    T& value() { return std::get<0>(v_); }
    const T& value() const { return std::get<0>(v_); }
    T& operator*() { return value(); }
    const T& operator*() const { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

    TrapInfo& trap() { return std::get<1>(v_); }
    const TrapInfo& trap() const { return std::get<1>(v_); }

private:
    std::variant<T, TrapInfo> v_;
};

using MaybeTrap = std::optional<TrapInfo>;

// Fault codes for a failed access, per stage.
constexpr Exception page_fault_for(AccessKind kind) noexcept {
    switch (kind) {
    case AccessKind::fetch: return Exception::InstructionPageFault;
    case AccessKind::load: return Exception::LoadPageFault;
    case AccessKind::store: return Exception::StoreAmoPageFault;
    }
    return Exception::LoadPageFault;
}

constexpr Exception guest_page_fault_for(AccessKind kind) noexcept {
    switch (kind) {
    case AccessKind::fetch: return Exception::InstructionGuestPageFault;
    case AccessKind::load: return Exception::LoadGuestPageFault;
    case AccessKind::store: return Exception::StoreAmoGuestPageFault;
    }
    return Exception::LoadGuestPageFault;
}

constexpr Exception access_fault_for(AccessKind kind) noexcept {
    switch (kind) {
    case AccessKind::fetch: return Exception::InstructionAccessFault;
    case AccessKind::load: return Exception::LoadAccessFault;
    case AccessKind::store: return Exception::StoreAmoAccessFault;
    }
    return Exception::LoadAccessFault;
}

constexpr Exception misaligned_for(AccessKind kind) noexcept {
    switch (kind) {
    case AccessKind::fetch: return Exception::InstructionAddressMisaligned;
    case AccessKind::load: return Exception::LoadAddressMisaligned;
    case AccessKind::store: return Exception::StoreAmoAddressMisaligned;
    }
    return Exception::LoadAddressMisaligned;
}

} // namespace hvsim
