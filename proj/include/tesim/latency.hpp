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
#include <string_view>
#include <vector>

#include "tesim/config.hpp"

// Analytical cycle model built from the pipelined-loop latency formula
// PLL = (TC - 1) * II + PD and its nested form TL = PLL * outer TC.

namespace tesim {

using Cycles = std::uint64_t;

enum class AccountingMode {
    /// Each attention stage counted once, as in the summed stage equations.
    paper_literal,
    /// LIA, LWA and SA repeat once per MHA tile (each tile reloads inputs and weights).
    per_tile,
};

enum class Stage { LI, LB, LIA, LWA, SA, BA, S, SV, SOFTMAX, FFN1, FFN2, FFN3, LN };

std::string_view to_string(AccountingMode m);
std::string_view to_string(Stage s);
AccountingMode parse_accounting_mode(std::string_view text);

struct StageLatency {
    Stage stage = Stage::LI;
    Cycles cycles = 0;
    bool per_layer = true;
    /// True for stages whose equations are extrapolated (FFN, softmax, LN).
    bool model_derived = false;

    friend bool operator==(const StageLatency&, const StageLatency&) = default;
};

struct LatencyReport {
    std::vector<StageLatency> stages;  // one layer's worth
    int num_layers = 0;
    Cycles per_layer_cc = 0;
    Cycles total_cc = 0;
    double clock_mhz = 0.0;
    double total_ms = 0.0;
    double total_ops = 0.0;
    double gops = 0.0;
    AccountingMode mode = AccountingMode::paper_literal;

    Cycles stage_cycles(Stage s) const;
};

/// (tc - 1) * ii + pd.
Cycles pll(Cycles tc, Cycles ii, Cycles pd);
/// pll_cycles * outer_tc.
Cycles total_loop_latency(Cycles pll_cycles, Cycles outer_tc);

/// LI, LB, LIA, LWA, SA, BA, S, SV for one layer (heads run in parallel).
std::vector<StageLatency> attention_stage_latencies(const ModelConfig& m, const HardwareConfig& hw,
                                                    AccountingMode mode);

struct LatencyTotal {
    Cycles cycles = 0;
    double ms = 0.0;
};

LatencyTotal attention_total(const std::vector<StageLatency>& stages, double clock_mhz);

/// cycles * 10^3 / (clock_mhz * 10^6).
double cycles_to_ms(Cycles cycles, double clock_mhz);

/// FFN1, FFN2, FFN3 for one layer.
std::vector<StageLatency> ffn_stage_latencies(const ModelConfig& m, const HardwareConfig& hw);

/// SOFTMAX and LN allowances for one layer.
std::vector<StageLatency> auxiliary_stage_latencies(const ModelConfig& m, const HardwareConfig& hw);

/// N x (attention + softmax + FFN + LN); exactly linear in num_layers.
LatencyReport encoder_latency(const ModelConfig& m, const HardwareConfig& hw, AccountingMode mode);

/// Operations for one forward pass, counting a multiply-accumulate as 2 ops,
/// over QKV, QK, SV, FFN1, FFN2 and FFN3.
double total_ops(const ModelConfig& m);

/// total_ops / seconds / 1e9. Throws std::invalid_argument for latency <= 0.
double gops(double ops, double latency_ms);

}  // namespace tesim
