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

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvsim/machine.hpp"

namespace hvsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ImageSpec {
    std::string path;
    addr_t base = 0;
    friend bool operator==(const ImageSpec&, const ImageSpec&) = default;
};

struct RunConfig {
    MachineConfig machine;
    bool trace = false;
    uint64_t max_instructions = 10'000'000;
    std::vector<ImageSpec> images;
};

// "path@hexbase", e.g. "fw.bin@80000000" or "fw.bin@0x80000000".
ImageSpec parse_image_spec(const std::string& text);

// Applies one key=value setting. Keys:
//   machine.harts machine.tlb_capacity machine.ticks_per_step
//   memory.ram_base memory.ram_size
//   clint.base plic.base bench.base exit.base
//   plic.geilen plic.sources plic.num_blocks plic.viirs_per_block plic.mgmt_irq_base
//   bench.irq
//   run.trace run.max_instructions run.image (repeatable)
// Numbers are decimal or 0x-prefixed hex.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat key=value lines; '#' starts a comment. Errors carry origin:line.
RunConfig parse_config(std::istream& in, const std::string& origin, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// Throws ConfigError with a diagnostic.
void validate(const RunConfig& cfg);

std::vector<std::string> config_keys();

} // namespace hvsim
