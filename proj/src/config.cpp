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

#include "hvsim/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

namespace hvsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

uint64_t parse_number(const std::string& key, const std::string& text, int base = 0) {
    std::string t = text;
    int b = base;
    if (b == 0) {
        b = 10;
        if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
            t = t.substr(2);
            b = 16;
        }
    } else if (b == 16 && t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
        t = t.substr(2);
    }
    uint64_t v = 0;
    const char* end = t.data() + t.size();
    auto [p, ec] = std::from_chars(t.data(), end, v, b);
    if (t.empty() || ec != std::errc() || p != end)
        throw ConfigError(key + ": '" + text + "' is not a valid number");
    return v;
}

unsigned parse_small(const std::string& key, const std::string& text) {
    const uint64_t v = parse_number(key, text);
    if (v > 0xFFFF'FFFFull) throw ConfigError(key + ": value out of range");
    return static_cast<unsigned>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "off" || text == "no") return false;
    throw ConfigError(key + ": '" + text + "' is not a boolean");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> s{
        {"machine.harts", [](RunConfig& c, auto& k, auto& v) { c.machine.harts = parse_small(k, v); }},
        {"machine.tlb_capacity", [](RunConfig& c, auto& k, auto& v) { c.machine.tlb_capacity = parse_number(k, v); }},
        {"machine.ticks_per_step",
         [](RunConfig& c, auto& k, auto& v) { c.machine.ticks_per_step = parse_number(k, v); }},
        {"memory.ram_base", [](RunConfig& c, auto& k, auto& v) { c.machine.map.ram_base = parse_number(k, v); }},
        {"memory.ram_size", [](RunConfig& c, auto& k, auto& v) { c.machine.map.ram_size = parse_number(k, v); }},
        {"clint.base", [](RunConfig& c, auto& k, auto& v) { c.machine.map.clint_base = parse_number(k, v); }},
        {"plic.base", [](RunConfig& c, auto& k, auto& v) { c.machine.map.plic_base = parse_number(k, v); }},
        {"bench.base", [](RunConfig& c, auto& k, auto& v) { c.machine.map.bench_base = parse_number(k, v); }},
        {"exit.base", [](RunConfig& c, auto& k, auto& v) { c.machine.map.exit_base = parse_number(k, v); }},
        {"plic.geilen", [](RunConfig& c, auto& k, auto& v) { c.machine.geilen = parse_small(k, v); }},
        {"plic.sources", [](RunConfig& c, auto& k, auto& v) { c.machine.num_sources = parse_small(k, v); }},
        {"plic.num_blocks", [](RunConfig& c, auto& k, auto& v) { c.machine.num_blocks = parse_small(k, v); }},
        {"plic.viirs_per_block",
         [](RunConfig& c, auto& k, auto& v) { c.machine.viirs_per_block = parse_small(k, v); }},
        {"plic.mgmt_irq_base", [](RunConfig& c, auto& k, auto& v) { c.machine.mgmt_irq_base = parse_small(k, v); }},
        {"bench.irq", [](RunConfig& c, auto& k, auto& v) { c.machine.bench_irq = parse_small(k, v); }},
        {"run.trace", [](RunConfig& c, auto& k, auto& v) { c.trace = parse_bool(k, v); }},
        {"run.max_instructions", [](RunConfig& c, auto& k, auto& v) { c.max_instructions = parse_number(k, v); }},
        {"run.image", [](RunConfig& c, auto&, auto& v) { c.images.push_back(parse_image_spec(v)); }},
    };
    return s;
}

} // namespace

ImageSpec parse_image_spec(const std::string& text) {
    const auto at = text.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 == text.size())
        throw ConfigError("image '" + text + "': expected path@hex-base");
    ImageSpec s;
    s.path = text.substr(0, at);
    s.base = parse_number("image base", text.substr(at + 1), 16);
    return s;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& s = setters();
    const auto it = s.find(key);
    if (it == s.end()) throw ConfigError("unknown key '" + key + "'");
    it->second(cfg, key, value);
}

RunConfig parse_config(std::istream& in, const std::string& origin, RunConfig base) {
    std::string line;
    unsigned n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected key=value");
        try {
            apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open");
    return parse_config(f, path, std::move(base));
}

void validate(const RunConfig& cfg) {
    try {
        cfg.machine.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (cfg.machine.map.ram_size == 0 || cfg.machine.map.ram_size % 0x1000)
        throw ConfigError("memory.ram_size must be a nonzero multiple of 4 KiB");
    if (cfg.machine.map.ram_size > (4ull << 30)) throw ConfigError("memory.ram_size is limited to 4 GiB");
    if (cfg.machine.bench_irq == 0 || cfg.machine.bench_irq > cfg.machine.num_sources)
        throw ConfigError("bench.irq must name a PLIC source");
    const auto& m = cfg.machine.map;
    for (const auto& img : cfg.images)
        if (img.base < m.ram_base || img.base - m.ram_base >= m.ram_size)
            throw ConfigError("image '" + img.path + "' base is outside RAM");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
}

} // namespace hvsim
