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

#include "hvsim/types.hpp"

namespace hvsim {

// A memory-mapped device occupying one bus window. Offsets are relative to
// the window base. A failed access (nullopt / false) becomes an access fault.
class Device {
public:
    virtual ~Device() = default;

    virtual std::optional<uint64_t> read(addr_t offset, unsigned width) = 0;
    virtual bool write(addr_t offset, unsigned width, uint64_t value) = 0;
    virtual void reset() = 0;
};

} // namespace hvsim
