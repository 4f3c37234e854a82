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

#include "hvsim/bus.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace hvsim {

void MemoryMap::validate() const {
    struct W {
        const char* name;
        addr_t base;
        uint64_t size;
    };
    const W ws[] = {{"ram", ram_base, ram_size},
                    {"clint", clint_base, Clint::kSize},
                    {"plic", plic_base, Plic::kSize},
                    {"bench", bench_base, BenchTimer::kSize},
                    {"exit", exit_base, HostExit::kSize}};
    if (ram_size == 0 || ram_size % 4096) throw std::invalid_argument("ram size must be a nonzero multiple of 4096");
    for (const W& a : ws) {
        if (a.base % 4096) throw std::invalid_argument(std::string(a.name) + " base must be 4 KiB aligned");
        if (a.base + a.size < a.base) throw std::invalid_argument(std::string(a.name) + " window wraps");
    }
    for (size_t i = 0; i < std::size(ws); ++i)
        for (size_t j = i + 1; j < std::size(ws); ++j) {
            const W& a = ws[i];
            const W& b = ws[j];
            if (a.base < b.base + b.size && b.base < a.base + a.size)
                throw std::invalid_argument(std::string(a.name) + " and " + b.name + " windows overlap");
        }
}

uint64_t Ram::load(addr_t pa, unsigned width) const noexcept {
    uint64_t v = 0;
    std::memcpy(&v, bytes_.data() + (pa - base_), width);
    return v;
}

void Ram::store(addr_t pa, unsigned width, uint64_t value) noexcept {
    std::memcpy(bytes_.data() + (pa - base_), &value, width);
}

void Ram::clear() noexcept { std::fill(bytes_.begin(), bytes_.end(), 0); }

std::optional<uint64_t> BenchTimer::read(addr_t off, unsigned width) {
    if ((width != 4 && width != 8) || off % 8) return std::nullopt;
    switch (off) {
    case kCounter: return counter_;
    case kPeriod: return period_;
    case kControl: return enabled_ ? 1 : 0;
    case kAck: return line_ ? 1 : 0;
    default: return std::nullopt;
    }
}

bool BenchTimer::write(addr_t off, unsigned width, uint64_t value) {
    if ((width != 4 && width != 8) || off % 8) return false;
    switch (off) {
    case kPeriod: period_ = value; return true;
    case kControl: {
        const bool on = value & 1;
        if (on && !enabled_) counter_ = 0;
        enabled_ = on;
        return true;
    }
    case kAck: line_ = false; return true;
    default: return false;
    }
}

void BenchTimer::reset() {
    counter_ = 0;
    period_ = 0;
    enabled_ = false;
    line_ = false;
    assertions_ = 0;
}

void BenchTimer::tick(uint64_t ticks) {
    if (!enabled_ || period_ == 0) return;
    for (uint64_t i = 0; i < ticks; ++i) {
        if (++counter_ >= period_) {
            counter_ = 0;
            line_ = true;
            ++assertions_;
        }
    }
}

std::optional<uint64_t> HostExit::read(addr_t off, unsigned width) {
    if ((width != 4 && width != 8) || (off != kExit && off != kPutc)) return std::nullopt;
    return 0;
}

bool HostExit::write(addr_t off, unsigned width, uint64_t value) {
    if (width != 4 && width != 8) return false;
    if (off == kExit) {
        if ((value & 1) && !code_) code_ = static_cast<int>((value >> 1) & 0x7FFFFFFF);
        return true;
    }
    if (off == kPutc) {
        out_.push_back(static_cast<char>(value & 0xFF));
        return true;
    }
    return false;
}

void HostExit::reset() {
    code_.reset();
    out_.clear();
}

namespace {
PlicConfig plic_config(const BusConfig& c) {
    PlicConfig p = c.plic;
    p.num_harts = c.num_harts;
    p.mutations = c.mutations;
    return p;
}
} // namespace

Bus::Bus(const BusConfig& config)
    : ram((config.map.validate(), config.map.ram_base), config.map.ram_size),
      clint(config.num_harts, config.mutations),
      plic(plic_config(config)),
      cfg_(config) {
    if (cfg_.bench_irq == 0 || cfg_.bench_irq > cfg_.plic.num_sources)
        throw std::invalid_argument("bench irq must be a valid PLIC source");
    windows_ = {{cfg_.map.clint_base, Clint::kSize, &clint},
                {cfg_.map.plic_base, Plic::kSize, &plic},
                {cfg_.map.bench_base, BenchTimer::kSize, &bench},
                {cfg_.map.exit_base, HostExit::kSize, &host}};
}

const Bus::Window* Bus::find(addr_t pa, unsigned width) const {
    for (const Window& w : windows_)
        if (pa >= w.base && pa - w.base < w.size && w.size - (pa - w.base) >= width) return &w;
    return nullptr;
}

std::optional<uint64_t> Bus::read(addr_t pa, unsigned width) {
    if (pa % width) return std::nullopt;
    if (ram.contains(pa, width)) return ram.load(pa, width);
    if (const Window* w = find(pa, width)) return w->dev->read(pa - w->base, width);
    return std::nullopt;
}

bool Bus::write(addr_t pa, unsigned width, uint64_t value) {
    if (pa % width) return false;
    if (ram.contains(pa, width)) {
        ram.store(pa, width, value);
        return true;
    }
    if (const Window* w = find(pa, width)) {
        const bool ok = w->dev->write(pa - w->base, width, value);
        if (ok && w->dev == &bench) plic.set_source_level(cfg_.bench_irq, bench.line());
        return ok;
    }
    return false;
}

std::optional<uint64_t> Bus::read_pte(addr_t pa) const {
    if (pa % 8 || !ram.contains(pa, 8)) return std::nullopt;
    return ram.load(pa, 8);
}

void Bus::reset() {
    ram.clear();
    clint.reset();
    plic.reset();
    bench.reset();
    host.reset();
}

void Bus::tick(uint64_t ticks) {
    clint.tick(ticks);
    const bool before = bench.line();
    bench.tick(ticks);
    if (bench.line() != before) plic.set_source_level(cfg_.bench_irq, bench.line());
}

void Bus::load_image(const std::vector<uint8_t>& bytes, addr_t base) {
    if (bytes.empty()) return;
    if (!ram.contains(base, static_cast<unsigned>(std::min<uint64_t>(bytes.size(), ~0u))) ||
        bytes.size() > ram.size() - (base - ram.base()))
        throw std::runtime_error("image does not fit in RAM at the requested base");
    std::memcpy(ram.data(base), bytes.data(), bytes.size());
}

void Bus::load_image_file(const std::string& path, addr_t base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    load_image(bytes, base);
}

} // namespace hvsim
