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

#include "hvsim/clint.hpp"

#include <stdexcept>

namespace hvsim {

Clint::Clint(unsigned num_harts, MutationSet mutations)
    : harts_(num_harts), mutations_(mutations) {
    if (num_harts == 0 || num_harts > kMaxHarts)
        throw std::invalid_argument("clint: hart count out of range");
}

void Clint::reset() {
    mtime_ = 0;
    for (auto& h : harts_) h = HartRegs{};
}

Clint::Lines Clint::lines(unsigned hart) const noexcept {
    const HartRegs& h = harts_[hart];
    Lines l;
    l.msip = h.msip;
    l.mtip = mtime_ >= h.mtimecmp;
    l.stip = mtime_ >= h.stimecmp;
    l.vstip = !has_mutation(mutations_, Mutation::clint_vstimer) &&
              mtime_ + h.htimedelta >= h.vstimecmp;
    return l;
}

std::optional<Clint::Decoded> Clint::decode(addr_t offset, unsigned width) const {
    if (width != 4 && width != 8) return std::nullopt;
    if (offset % width != 0) return std::nullopt;
    const unsigned n = num_harts();

    // Single 64-bit registers.
    const addr_t base8 = offset & ~addr_t{7};
    const unsigned half = (offset & 4) ? 1 : 0;
    if (base8 == kMtime) return Decoded{Reg::mtime, 0, half};
    if (base8 == kStime) return Decoded{Reg::stime, 0, half};

    if (offset < kMtimecmp) {
        if (width != 4) return std::nullopt;
        const addr_t idx = offset / 4;
        if (idx >= n) return std::nullopt;
        return Decoded{Reg::msip, static_cast<unsigned>(idx), 0};
    }

    struct Array {
        addr_t base;
        Reg reg;
    };
    static constexpr Array arrays[] = {
        {kMtimecmp, Reg::mtimecmp}, {kStimecmp, Reg::stimecmp},   {kVstime, Reg::vstime},
        {kVstimecmp, Reg::vstimecmp}, {kHtimedelta, Reg::htimedelta},
    };
    for (const auto& a : arrays) {
        if (base8 < a.base) continue;
        const addr_t idx = (base8 - a.base) / 8;
        if (idx < n) return Decoded{a.reg, static_cast<unsigned>(idx), half};
    }
    return std::nullopt;
}

uint64_t& Clint::storage(const Decoded& d) {
    HartRegs& h = harts_[d.hart];
    switch (d.reg) {
    case Reg::mtimecmp: return h.mtimecmp;
    case Reg::stimecmp: return h.stimecmp;
    case Reg::vstimecmp: return h.vstimecmp;
    case Reg::htimedelta: return h.htimedelta;
    default: return mtime_;
    }
}

uint64_t Clint::value_of(const Decoded& d) const {
    switch (d.reg) {
    case Reg::msip: return harts_[d.hart].msip ? 1 : 0;
    case Reg::mtime:
    case Reg::stime: return mtime_;
    case Reg::vstime: return vstime(d.hart);
    case Reg::mtimecmp: return harts_[d.hart].mtimecmp;
    case Reg::stimecmp: return harts_[d.hart].stimecmp;
    case Reg::vstimecmp: return harts_[d.hart].vstimecmp;
    case Reg::htimedelta: return harts_[d.hart].htimedelta;
    }
    return 0;
}

std::optional<uint64_t> Clint::read(addr_t offset, unsigned width) {
    auto d = decode(offset, width);
    if (!d) return std::nullopt;
    const uint64_t v = value_of(*d);
    if (width == 8) return v;
    return d->half ? v >> 32 : v & 0xFFFF'FFFF;
}

bool Clint::write(addr_t offset, unsigned width, uint64_t value) {
    auto d = decode(offset, width);
    if (!d) return false;
    if (d->reg == Reg::stime || d->reg == Reg::vstime) return false;
    if (d->reg == Reg::msip) {
        harts_[d->hart].msip = value & 1;
        return true;
    }
    uint64_t& slot = storage(*d);
    if (width == 8) {
        slot = value;
    } else if (d->half) {
        slot = (slot & 0xFFFF'FFFF) | (value << 32);
    } else {
        slot = (slot & ~0xFFFF'FFFFull) | (value & 0xFFFF'FFFF);
    }
    return true;
}

} // namespace hvsim
