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

// Writes the flat test images used by the CLI tests.
//   make_image <timer|exit|spin> <out.bin> [arg]

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "programs.hpp"

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: make_image <timer|exit|spin> <out.bin> [arg]\n");
        return 2;
    }
    const std::string kind = argv[1];
    const unsigned arg = argc > 3 ? static_cast<unsigned>(std::strtoul(argv[3], nullptr, 0)) : 5;
    const hvsim::MemoryMap map;
    std::vector<uint8_t> img;
    if (kind == "timer")
        img = programs::timer_demo(map, arg);
    else if (kind == "exit")
        img = programs::exit_with(map, arg);
    else if (kind == "spin")
        img = programs::spin(map);
    else {
        std::fprintf(stderr, "make_image: unknown image '%s'\n", kind.c_str());
        return 2;
    }
    std::ofstream out(argv[2], std::ios::binary);
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    return out ? 0 : 1;
}
