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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hvsim/bench.hpp"
#include "hvsim/config.hpp"
#include "hvsim/conformance.hpp"
#include "hvsim/machine.hpp"

namespace {

using namespace hvsim;

constexpr int kExitBudget = 124;
constexpr int kExitConfig = 64;
constexpr int kExitFail = 1;

// hart, pc, raw, priv, V, cause (or "-"); all hex, tab separated.
void print_trace_line(std::FILE* out, unsigned hart, const StepOutcome& s) {
    char cause[24] = "-";
    if (s.trap) std::snprintf(cause, sizeof cause, "%llx", static_cast<unsigned long long>(s.trap->cause.encoded()));
    std::fprintf(out, "%x\t%llx\t%08x\t%x\t%x\t%s\n", hart, static_cast<unsigned long long>(s.pc), s.raw,
                 static_cast<unsigned>(s.ctx.priv), s.ctx.virt ? 1u : 0u, cause);
}

struct Common {
    std::string config_path;
    std::vector<std::string> mutations;
};

RunConfig load_base(const Common& c) {
    RunConfig cfg;
    if (!c.config_path.empty()) cfg = load_config_file(c.config_path, cfg);
    return cfg;
}

MutationSet parse_mutations(const std::vector<std::string>& names) {
    MutationSet set = 0;
    for (const auto& n : names) {
        const auto m = mutation_from_name(n);
        if (!m) throw ConfigError("unknown mutation '" + n + "'");
        set |= static_cast<MutationSet>(*m);
    }
    return set;
}

int cmd_run(const Common& c, const std::vector<std::string>& images, bool trace, std::optional<uint64_t> max_instr) {
    RunConfig cfg = load_base(c);
    for (const auto& i : images) cfg.images.push_back(parse_image_spec(i));
    if (trace) cfg.trace = true;
    if (max_instr) cfg.max_instructions = *max_instr;
    cfg.machine.mutations = parse_mutations(c.mutations);
    validate(cfg);
    if (cfg.images.empty()) throw ConfigError("no image given (use --image path@hex-base)");

    Machine m(cfg.machine);
    for (const auto& img : cfg.images) {
        try {
            m.bus().load_image_file(img.path, img.base);
        } catch (const std::exception& e) {
            throw ConfigError("image '" + img.path + "': " + e.what());
        }
    }
    if (cfg.trace) m.set_step_hook([](unsigned hart, const StepOutcome& s) { print_trace_line(stdout, hart, s); });
    const RunResult r = m.run(cfg.max_instructions);
    std::fflush(stdout);
    const std::string& console = m.bus().host.output();
    if (!console.empty()) std::cerr << console;
    if (r.stop == RunResult::Stop::budget) {
        std::cerr << "hvsim: instruction budget of " << cfg.max_instructions << " exhausted\n";
        return kExitBudget;
    }
    const int code = r.exit_code & 0xFF;
    return code == 0 && r.exit_code != 0 ? kExitFail : code;
}

int cmd_test(const Common& c, const std::string& filter, std::optional<size_t> tlb, bool matrix_only) {
    SuiteOptions opts;
    opts.filter = filter;
    opts.mutations = parse_mutations(c.mutations);
    opts.tlb_capacity = tlb;
    const SuiteReport rep = run_suite(opts);
    if (rep.results.empty()) {
        std::cerr << "hvsim: no unit matches '" << filter << "'\n";
        return kExitFail;
    }
    if (!matrix_only) print_junit(std::cout, rep);
    print_feature_matrix(std::cout, rep);
    return rep.ok() ? 0 : kExitFail;
}

int cmd_bench(const Common& c, const std::string& mode, unsigned samples, unsigned discard, uint64_t period,
              bool per_sample) {
    LatencyOptions opts;
    const auto m = latency_mode_from_name(mode);
    if (!m) throw ConfigError("unknown mode '" + mode + "' (direct or trap-emulate)");
    opts.mode = *m;
    opts.samples = samples;
    opts.discard = discard;
    opts.period = period;
    opts.mutations = parse_mutations(c.mutations);
    if (!c.config_path.empty()) {
        RunConfig cfg = load_base(c);
        validate(cfg);
        opts.machine = cfg.machine;
    }
    const LatencyReport rep = run_latency(opts);
    print_latency(std::cout, rep);
    if (per_sample && rep.ok()) print_latency_samples(std::cout, rep);
    return rep.ok() ? 0 : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hvsim: RV64 hypervisor-extension platform simulator"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "key=value configuration file");
    app.add_option("--mutate", common.mutations, "enable a fault-injection flag (repeatable)");

    auto* run = app.add_subcommand("run", "run flat binary images");
    std::vector<std::string> images;
    bool trace = false;
    std::optional<uint64_t> max_instr;
    run->add_option("--image", images, "path@hex-base (repeatable)");
    run->add_flag("--trace", trace, "per-step trace on stdout");
    run->add_option("--max-instr", max_instr, "scheduler step budget");

    auto* test = app.add_subcommand("test", "run the conformance units");
    std::string filter;
    std::optional<size_t> tlb;
    bool matrix_only = false;
    test->add_option("--filter", filter, "case-insensitive unit or feature substring");
    test->add_option("--tlb", tlb, "TLB capacity override");
    test->add_flag("--matrix-only", matrix_only, "print only the feature matrix");

    auto* bench = app.add_subcommand("bench-latency", "interrupt latency benchmark");
    std::string mode = "direct";
    unsigned samples = 100;
    unsigned discard = 2;
    uint64_t period = 500;
    bool per_sample = false;
    bench->add_option("--mode", mode, "direct or trap-emulate");
    bench->add_option("--samples", samples, "samples taken, warm-up included");
    bench->add_option("--discard", discard, "warm-up samples dropped");
    bench->add_option("--period", period, "ticks between timer interrupts");
    bench->add_flag("--per-sample", per_sample, "list every sample");

    for (auto* sub : {run, test, bench}) {
        sub->add_option("--config", common.config_path, "key=value configuration file");
        sub->add_option("--mutate", common.mutations, "enable a fault-injection flag (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(common, images, trace, max_instr);
        if (test->parsed()) return cmd_test(common, filter, tlb, matrix_only);
        return cmd_bench(common, mode, samples, discard, period, per_sample);
    } catch (const ConfigError& e) {
        std::cerr << "hvsim: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "hvsim: invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "hvsim: " << e.what() << "\n";
        return kExitFail;
    }
}
