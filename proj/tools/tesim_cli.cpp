/*
 * Copyright 2026 The tesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tesim/commands.hpp"
#include "tesim/dse.hpp"
#include "tesim/parallel.hpp"
#include "tesim/rng.hpp"
#include "tesim/tensor_io.hpp"

namespace {

using namespace tesim;

struct Output {
    std::string report_path;
    bool json = false;
};

void add_output_flags(CLI::App* cmd, Output& out) {
    cmd->add_option("--report", out.report_path, "Write the JSON report to this file");
    cmd->add_flag("--json", out.json, "Print the JSON report instead of the text tables");
}

int emit(const CommandResult& r, const Output& out) {
    const std::string body = r.report.dump(2) + "\n";
    if (!out.report_path.empty()) {
        std::ofstream f(out.report_path, std::ios::binary);
        if (!f) throw FormatError("cannot open " + out.report_path + " for writing");
        f << body;
    }
    std::cout << (out.json ? body : r.text);
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tiled fixed-point transformer encoder simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    Output out;

    auto* verify = app.add_subcommand("verify", "Check tiled engines against the untiled oracle and float reference");
    verify->add_option("--config", config_path)->required();
    verify->add_option("--seed", seed)->required();
    SizeOverrides sizes;
    verify->add_option("--d-model", sizes.d_model);
    verify->add_option("--heads", sizes.num_heads);
    verify->add_option("--layers", sizes.num_layers);
    verify->add_option("--seq-len", sizes.seq_len);
    verify->add_option("--ts-mha", sizes.ts_mha);
    verify->add_option("--ts-ffn", sizes.ts_ffn);
    verify->add_option("--per-tile", sizes.per_tile_requantize, "Override per-tile requantization (true/false)");
    bool inject_fault = false;
    verify->add_flag("--inject-fault", inject_fault, "Corrupt one tiled output raw to test the checker");
    add_output_flags(verify, out);

    auto* simulate = app.add_subcommand("simulate", "Run the functional model and report latency and resources");
    SimulateOptions sim;
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--weights", sim.weights_path, "PTEAW weight container");
    simulate->add_option("--input", sim.input_path, "PTEA1 input tensor");
    simulate->add_option("--seed", seed, "Seed for whichever of weights/input is not given");
    simulate->add_option("--out", sim.out_path, "Output tensor path")->required();
    add_output_flags(simulate, out);

    auto* estimate = app.add_subcommand("estimate", "Analytical latency and resource estimate only");
    estimate->add_option("--config", config_path)->required();
    add_output_flags(estimate, out);

    auto* dse = app.add_subcommand("dse", "Sweep tile counts and select the best feasible point");
    std::string sweep_path;
    dse->add_option("--config", config_path)->required();
    dse->add_option("--sweep", sweep_path)->required();
    add_output_flags(dse, out);

    auto* generate = app.add_subcommand("generate", "Write seeded weights and input to files");
    std::string weights_out, input_out;
    generate->add_option("--config", config_path)->required();
    generate->add_option("--seed", seed)->required();
    generate->add_option("--weights-out", weights_out);
    generate->add_option("--input-out", input_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    try {
        const int threads = threads_from_env();
        const ParsedConfig cfg = load_config(config_path);
        if (verify->parsed()) return emit(run_verify(cfg, *seed, sizes, threads, inject_fault), out);
        if (simulate->parsed()) {
            sim.seed = seed;
            return emit(run_simulate(cfg, sim, threads), out);
        }
        if (estimate->parsed()) return emit(run_estimate(cfg), out);
        if (dse->parsed()) return emit(run_dse(cfg, load_sweep_spec(sweep_path), threads), out);
        if (generate->parsed()) {
            require_valid(cfg.model, cfg.hardware);
            const FixedFormat f = cfg.hardware.fx_format;
            if (!weights_out.empty()) save_weights(weights_out, generate_weights(*seed, cfg.model, f));
            if (!input_out.empty()) save_tensor(input_out, generate_input(*seed, cfg.model, f));
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
