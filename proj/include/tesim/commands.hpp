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

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tesim/config.hpp"
#include "tesim/report.hpp"

namespace tesim {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfigError = 2,
    kExitInvariantViolation = 3,
    kExitInfeasible = 4,
};

struct CommandResult {
    int exit_code = kExitOk;
    Json report;
    std::string text;
};

/// Model-size overrides for verify; any set field replaces the config value
/// and the synthesis maxima follow the overridden model.
struct SizeOverrides {
    std::optional<int> d_model, num_heads, num_layers, seq_len, ts_mha, ts_ffn;
    std::optional<bool> per_tile_requantize;
};

/// Runs tiled, untiled and float paths on seeded data and checks the
/// tiling and softmax invariants. Exit 3 on any violation. inject_fault
/// flips one bit of the tiled output before comparison to exercise the
/// failure path.
CommandResult run_verify(const ParsedConfig& cfg, std::uint64_t seed, const SizeOverrides& sizes = {},
                         int threads = 1, bool inject_fault = false);

struct SimulateOptions {
    std::optional<std::string> weights_path;
    std::optional<std::string> input_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
};

/// Writes the functional output tensor to out_path and reports latency in
/// both accounting modes, resources and error against the float reference.
CommandResult run_simulate(const ParsedConfig& cfg, const SimulateOptions& opts, int threads = 1);

CommandResult run_estimate(const ParsedConfig& cfg);

/// Exit 4 when no candidate is feasible.
CommandResult run_dse(const ParsedConfig& cfg, const SweepSpec& spec, int threads = 1);

}  // namespace tesim
