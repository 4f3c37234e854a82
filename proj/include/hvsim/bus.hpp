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
#include <vector>

#include "hvsim/clint.hpp"
#include "hvsim/device.hpp"
#include "hvsim/mmu.hpp"
#include "hvsim/plic.hpp"

namespace hvsim {

struct MemoryMap {
    addr_t ram_base = 0x8000'0000;
    uint64_t ram_size = 64ull << 20;
    addr_t clint_base = 0x0200'0000;
    addr_t plic_base = 0x0C00'0000;
    addr_t bench_base = 0x1100'0000;
    addr_t exit_base = 0x1100'1000;

    // Throws std::invalid_argument on overlapping or misaligned windows.
    void validate() const;
};

class Ram {
public:
    Ram(addr_t base, uint64_t size) : base_(base), bytes_(size, 0) {}

    addr_t base() const noexcept { return base_; }
    uint64_t size() const noexcept { return bytes_.size(); }
    bool contains(addr_t pa, unsigned width) const noexcept {
        return pa >= base_ && pa - base_ <= bytes_.size() && bytes_.size() - (pa - base_) >= width;
    }

    uint64_t load(addr_t pa, unsigned width) const noexcept;
    void store(addr_t pa, unsigned width, uint64_t value) noexcept;
    void clear() noexcept;
    uint8_t* data(addr_t pa) noexcept { return bytes_.data() + (pa - base_); }

private:
    addr_t base_;
    std::vector<uint8_t> bytes_;
};

// Auto-restart incrementing timer driving one PLIC source.
//
//   0x00 counter (RO)   0x08 period   0x10 control (bit 0 enable)   0x18 ack (write clears line)
class BenchTimer final : public Device {
public:
    static constexpr addr_t kCounter = 0x00;
    static constexpr addr_t kPeriod = 0x08;
    static constexpr addr_t kControl = 0x10;
    static constexpr addr_t kAck = 0x18;
    static constexpr addr_t kSize = 0x1000;

    std::optional<uint64_t> read(addr_t offset, unsigned width) override;
    bool write(addr_t offset, unsigned width, uint64_t value) override;
    void reset() override;

    void tick(uint64_t ticks);
    bool line() const noexcept { return line_; }
    uint64_t counter() const noexcept { return counter_; }
    uint64_t assertions() const noexcept { return assertions_; }

private:
    uint64_t counter_ = 0;
    uint64_t period_ = 0;
    bool enabled_ = false;
    bool line_ = false;
    uint64_t assertions_ = 0;
};

// Write (code << 1) | 1 to offset 0 to stop the simulation with status code.
// Offset 8 is a write-only character port.
class HostExit final : public Device {
public:
    static constexpr addr_t kExit = 0x0;
    static constexpr addr_t kPutc = 0x8;
    static constexpr addr_t kSize = 0x1000;

    std::optional<uint64_t> read(addr_t offset, unsigned width) override;
    bool write(addr_t offset, unsigned width, uint64_t value) override;
    void reset() override;

    std::optional<int> exit_code() const noexcept { return code_; }
    const std::string& output() const noexcept { return out_; }

private:
    std::optional<int> code_;
    std::string out_;
};

struct BusConfig {
    MemoryMap map;
    unsigned num_harts = 1;
    PlicConfig plic;
    unsigned bench_irq = 1;
    MutationSet mutations = 0;
};

// Physical address space: RAM plus the device windows.
class Bus final : public PhysicalMemory {
public:
    explicit Bus(const BusConfig& config);

    std::optional<uint64_t> read(addr_t pa, unsigned width);
    bool write(addr_t pa, unsigned width, uint64_t value);
    std::optional<uint64_t> read_pte(addr_t pa) const override;

    void reset();
    // Advances the shared time base: mtime and the bench timer.
    void tick(uint64_t ticks);

    // Copies a flat image into RAM. Throws std::runtime_error when it does not fit.
    void load_image(const std::vector<uint8_t>& bytes, addr_t base);
    void load_image_file(const std::string& path, addr_t base);

    const MemoryMap& map() const noexcept { return cfg_.map; }
    const BusConfig& config() const noexcept { return cfg_; }

    Ram ram;
    Clint clint;
    Plic plic;
    BenchTimer bench;
    HostExit host;

private:
    struct Window {
        addr_t base;
        addr_t size;
        Device* dev;
    };
    const Window* find(addr_t pa, unsigned width) const;

    BusConfig cfg_;
    std::vector<Window> windows_;
};

} // namespace hvsim
