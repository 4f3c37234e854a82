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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hvsim/bus.hpp"

using namespace hvsim;

namespace {

BusConfig small_bus() {
    BusConfig c;
    c.map.ram_size = 1 << 20;
    c.num_harts = 2;
    c.plic.num_sources = 8;
    c.plic.geilen = 1;
    c.bench_irq = 3;
    return c;
}

} // namespace

TEST(Bus, RamReadBack) {
    Bus b(small_bus());
    const addr_t base = b.map().ram_base;
    ASSERT_TRUE(b.write(base, 8, 0x0123'4567'89ab'cdef));
    EXPECT_EQ(b.read(base, 8), 0x0123'4567'89ab'cdefu);
    EXPECT_EQ(b.read(base, 4), 0x89ab'cdefu);
    EXPECT_EQ(b.read(base + 4, 4), 0x0123'4567u);
    EXPECT_EQ(b.read(base + 1, 1), 0xcdu);
    EXPECT_EQ(b.read(base + 2, 2), 0x89abu);
    EXPECT_FALSE(b.read(base + 2, 4));  // misaligned
    EXPECT_FALSE(b.write(base + 4, 8, 0));
    EXPECT_EQ(b.read_pte(base), 0x0123'4567'89ab'cdefu);
    EXPECT_FALSE(b.read_pte(base + 4));
    const addr_t last = base + b.ram.size() - 8;
    EXPECT_TRUE(b.write(last, 8, 1));
    EXPECT_FALSE(b.read(last + 8, 8));
}

TEST(Bus, ClintRouting) {
    Bus b(small_bus());
    b.clint.set_mtime(0xAABB'CCDD'0011'2233);
    EXPECT_EQ(b.read(b.map().clint_base + 0xbff8, 4), 0x0011'2233u);
    EXPECT_EQ(b.read(b.map().clint_base + 0xbff8, 8), 0xAABB'CCDD'0011'2233u);
    ASSERT_TRUE(b.write(b.map().clint_base + 0x4008, 8, 42));
    EXPECT_EQ(b.clint.regs(1).mtimecmp, 42u);
    b.tick(5);
    EXPECT_EQ(b.clint.mtime(), 0xAABB'CCDD'0011'2238u);
}

TEST(Bus, PlicRouting) {
    Bus b(small_bus());
    ASSERT_TRUE(b.write(b.map().plic_base + 4 * 2, 4, 6));
    EXPECT_EQ(b.plic.priority(2), 6u);
    EXPECT_EQ(b.read(b.map().plic_base + 4 * 2, 4), 6u);
}

TEST(Bus, HolesFault) {
    Bus b(small_bus());
    EXPECT_FALSE(b.read(0, 4));
    EXPECT_FALSE(b.read(0x1000'0000, 8));
    EXPECT_FALSE(b.write(0x7FFF'FFF8, 8, 0));
    EXPECT_FALSE(b.read(b.map().clint_base + Clint::kSize, 4));
    EXPECT_FALSE(b.read(b.map().ram_base + b.ram.size(), 1));
}

TEST(Bus, MapValidation) {
    MemoryMap m;
    EXPECT_NO_THROW(m.validate());
    m.plic_base = m.clint_base + 0x1000;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = MemoryMap{};
    m.exit_base += 8;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = MemoryMap{};
    m.ram_size = 100;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    BusConfig c = small_bus();
    c.bench_irq = 9;
    EXPECT_THROW(Bus{c}, std::invalid_argument);
}

TEST(BenchTimerTest, AssertsEveryPeriod) {
    Bus b(small_bus());
    const addr_t t = b.map().bench_base;
    const uint64_t period = 37;
    ASSERT_TRUE(b.write(t + BenchTimer::kPeriod, 8, period));
    ASSERT_TRUE(b.write(t + BenchTimer::kControl, 8, 1));
    std::vector<uint64_t> instants;
    for (uint64_t tick = 1; tick <= 10 * period; ++tick) {
        b.tick(1);
        if (b.bench.line()) {
            instants.push_back(tick);
            EXPECT_TRUE(b.plic.source_level(3));
            ASSERT_TRUE(b.write(t + BenchTimer::kAck, 8, 1));
            EXPECT_FALSE(b.plic.source_level(3));
        }
    }
    ASSERT_EQ(instants.size(), 10u);
    for (size_t k = 0; k < instants.size(); ++k) EXPECT_EQ(instants[k], (k + 1) * period);
    EXPECT_EQ(b.bench.assertions(), 10u);
}

TEST(BenchTimerTest, AckHoldsLineLowUntilNextBoundary) {
    Bus b(small_bus());
    const addr_t t = b.map().bench_base;
    ASSERT_TRUE(b.write(t + BenchTimer::kPeriod, 8, 10));
    ASSERT_TRUE(b.write(t + BenchTimer::kControl, 8, 1));
    b.tick(10);
    EXPECT_TRUE(b.bench.line());
    b.tick(3);
    EXPECT_EQ(b.read(t + BenchTimer::kCounter, 8), 3u); // ticks since assertion
    ASSERT_TRUE(b.write(t + BenchTimer::kAck, 8, 1));
    for (int i = 0; i < 6; ++i) {
        b.tick(1);
        EXPECT_FALSE(b.bench.line());
    }
    b.tick(1);
    EXPECT_TRUE(b.bench.line());
}

TEST(BenchTimerTest, CounterReadOnlyAndDisabled) {
    Bus b(small_bus());
    const addr_t t = b.map().bench_base;
    EXPECT_FALSE(b.write(t + BenchTimer::kCounter, 8, 5));
    ASSERT_TRUE(b.write(t + BenchTimer::kPeriod, 8, 4));
    b.tick(100);
    EXPECT_FALSE(b.bench.line());
    EXPECT_EQ(b.bench.counter(), 0u);
}

TEST(HostExitTest, ExitCodes) {
    {
        Bus b(small_bus());
        ASSERT_TRUE(b.write(b.map().exit_base, 4, 1));
        EXPECT_EQ(b.host.exit_code(), 0);
    }
    {
        Bus b(small_bus());
        ASSERT_TRUE(b.write(b.map().exit_base, 8, 5));
        EXPECT_EQ(b.host.exit_code(), 2);
        ASSERT_TRUE(b.write(b.map().exit_base, 8, 7)); // first code sticks
        EXPECT_EQ(b.host.exit_code(), 2);
    }
    {
        Bus b(small_bus());
        ASSERT_TRUE(b.write(b.map().exit_base, 8, 4)); // bit 0 clear: no exit
        EXPECT_FALSE(b.host.exit_code());
    }
}

TEST(HostExitTest, CharacterPort) {
    Bus b(small_bus());
    for (char ch : std::string("hi!")) ASSERT_TRUE(b.write(b.map().exit_base + HostExit::kPutc, 4, ch));
    EXPECT_EQ(b.host.output(), "hi!");
}

TEST(Image, OversizedRejected) {
    Bus b(small_bus());
    std::vector<uint8_t> big(b.ram.size() + 1, 0xAA);
    EXPECT_THROW(b.load_image(big, b.map().ram_base), std::runtime_error);
    std::vector<uint8_t> fits(16, 0xAA);
    EXPECT_THROW(b.load_image(fits, b.map().ram_base + b.ram.size() - 8), std::runtime_error);
    EXPECT_THROW(b.load_image(fits, 0x1000), std::runtime_error);
    EXPECT_NO_THROW(b.load_image(fits, b.map().ram_base + b.ram.size() - 16));
}

TEST(Image, FileLoad) {
    const auto path = std::filesystem::temp_directory_path() / "hvsim_bus_image.bin";
    {
        std::ofstream f(path, std::ios::binary);
        const unsigned char bytes[] = {0x93, 0x00, 0x50, 0x00};
        f.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
    }
    Bus b(small_bus());
    b.load_image_file(path.string(), b.map().ram_base + 0x100);
    EXPECT_EQ(b.read(b.map().ram_base + 0x100, 4), 0x0050'0093u);
    std::filesystem::remove(path);
    EXPECT_THROW(b.load_image_file(path.string(), b.map().ram_base), std::runtime_error);
}

TEST(Bus, ResetClearsEverything) {
    Bus b(small_bus());
    ASSERT_TRUE(b.write(b.map().ram_base, 8, 9));
    ASSERT_TRUE(b.write(b.map().exit_base, 8, 1));
    b.reset();
    EXPECT_EQ(b.read(b.map().ram_base, 8), 0u);
    EXPECT_FALSE(b.host.exit_code());
}
