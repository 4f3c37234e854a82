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

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvsim/harness.hpp"

namespace hvsim {

// Hypervisor-extension feature rows plus the platform extensions (CLINT,
// PLIC, TLB, harness) the suite also covers.
enum class Feature : uint8_t {
    hstatus,
    delegation,
    interrupt_csrs,
    hgeip_hgeie,
    hcounteren,
    htimedelta,
    tval2,
    tinst,
    hgatp,
    vs_csrs,
    hyp_ldst,
    hfence,
    ecall_vs,
    guest_page_faults,
    virtual_instruction,
    vs_interrupts,
    sgei,
    clint,
    plic,
    tlb,
    harness,
    count_
};

enum class Support : uint8_t { full, partial, none, extension };

struct FeatureInfo {
    Feature feature;
    const char* group;
    const char* name;
    Support support;
    const char* subset; // what the partial or hardwired implementation pins
};

const std::vector<FeatureInfo>& feature_table();
const FeatureInfo& feature_info(Feature f);
const char* support_symbol(Support s);

class UnitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Check helpers handed to every unit body. A failed check throws UnitFailure.
class UnitContext {
public:
    explicit UnitContext(Harness& h) : h(h) {}
    Harness& h;

    void check(bool cond, const std::string& what);
    void expect_eq(uint64_t got, uint64_t want, const std::string& what);
    void expect_none(const std::optional<TrapRecord>& t, const std::string& what);
    void expect_trap(const std::optional<TrapRecord>& t, Exception e, PrivilegeContext target,
                     const std::string& what);
    void expect_trap(const std::optional<TrapRecord>& t, Interrupt i, PrivilegeContext target,
                     const std::string& what);
};

struct Unit {
    std::string name;
    Feature feature;
    std::function<void(UnitContext&)> body;
};

const std::vector<Unit>& conformance_units();

struct UnitResult {
    std::string name;
    Feature feature = Feature::harness;
    bool passed = false;
    std::string message;
    std::vector<TrapRecord> traps;
    uint64_t digest = 0;
    uint64_t steps = 0;
    double seconds = 0;
};

struct SuiteOptions {
    std::string filter; // case-insensitive substring of unit or feature name
    MutationSet mutations = 0;
    std::optional<size_t> tlb_capacity;
    bool reverse = false;
};

struct SuiteReport {
    std::vector<UnitResult> results;
    size_t passed() const;
    size_t failed() const;
    bool ok() const { return failed() == 0; }
    const UnitResult* find(const std::string& name) const;
};

// Machine configuration every unit starts from.
MachineConfig conformance_config(MutationSet mutations = 0, std::optional<size_t> tlb_capacity = {});

bool unit_matches(const Unit& u, const std::string& filter);
UnitResult run_unit(const Unit& u, const SuiteOptions& opts);
SuiteReport run_suite(const SuiteOptions& opts);

// JUnit-style listing: one <testcase> per unit.
void print_junit(std::ostream& os, const SuiteReport& report);
// Feature rows with support marker and per-row unit pass counts.
void print_feature_matrix(std::ostream& os, const SuiteReport& report);

std::optional<Mutation> mutation_from_name(const std::string& name);
const char* mutation_name(Mutation m);
const std::vector<Mutation>& all_mutations();

} // namespace hvsim
