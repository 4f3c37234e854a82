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

#include <limits>
#include <vector>

#include "hvsim/device.hpp"

namespace hvsim {

// Core-local interrupter with supervisor and virtual-supervisor timers.
//
// Register map (offsets from the window base, n = hart):
//
//   msip n         0x00000 + n*4   M software interrupt (bit 0)
//   mtimecmp n     0x04000 + n*8
//   mtime          0x0bff8
//   stimecmp n     0x0c000 + n*8
//   vstime n       0x14000 + n*8   RO, mtime + htimedelta n
//   stime          0x1bff8         RO replica of mtime
//   vstimecmp n    0x1c000 + n*8
//   htimedelta n   0x24000 + n*8
//
// 64-bit registers accept one 8-byte access or 4-byte accesses to either half.
class Clint final : public Device {
public:
    static constexpr addr_t kMsip = 0x00000;
    static constexpr addr_t kMtimecmp = 0x04000;
    static constexpr addr_t kMtime = 0x0bff8;
    static constexpr addr_t kStimecmp = 0x0c000;
    static constexpr addr_t kVstime = 0x14000;
    static constexpr addr_t kStime = 0x1bff8;
    static constexpr addr_t kVstimecmp = 0x1c000;
    static constexpr addr_t kHtimedelta = 0x24000;
    static constexpr addr_t kSize = 0x30000;
    static constexpr unsigned kMaxHarts = 4095;

    explicit Clint(unsigned num_harts, MutationSet mutations = 0);

    std::optional<uint64_t> read(addr_t offset, unsigned width) override;
    bool write(addr_t offset, unsigned width, uint64_t value) override;
    void reset() override;

    unsigned num_harts() const noexcept { return static_cast<unsigned>(harts_.size()); }

    uint64_t mtime() const noexcept { return mtime_; }
    void set_mtime(uint64_t v) noexcept { mtime_ = v; }
    void tick(uint64_t ticks) noexcept { mtime_ += ticks; }

    uint64_t vstime(unsigned hart) const noexcept { return mtime_ + harts_[hart].htimedelta; }
    uint64_t htimedelta(unsigned hart) const noexcept { return harts_[hart].htimedelta; }
    void set_htimedelta(unsigned hart, uint64_t v) noexcept { harts_[hart].htimedelta = v; }

    struct Lines {
        bool msip = false;
        bool mtip = false;
        bool stip = false;
        bool vstip = false;
        friend bool operator==(const Lines&, const Lines&) = default;
    };
    Lines lines(unsigned hart) const noexcept;

    struct HartRegs {
        bool msip = false;
        uint64_t mtimecmp = std::numeric_limits<uint64_t>::max();
        uint64_t stimecmp = std::numeric_limits<uint64_t>::max();
        uint64_t vstimecmp = std::numeric_limits<uint64_t>::max();
        uint64_t htimedelta = 0;
    };
    const HartRegs& regs(unsigned hart) const { return harts_.at(hart); }

private:
    enum class Reg { msip, mtimecmp, mtime, stimecmp, vstime, stime, vstimecmp, htimedelta };
    struct Decoded {
        Reg reg;
        unsigned hart = 0;
        unsigned half = 0; // 0 low/full, 1 high 32 bits
    };
    std::optional<Decoded> decode(addr_t offset, unsigned width) const;
    uint64_t& storage(const Decoded& d);
    uint64_t value_of(const Decoded& d) const;

    uint64_t mtime_ = 0;
    std::vector<HartRegs> harts_;
    MutationSet mutations_;
};

} // namespace hvsim
