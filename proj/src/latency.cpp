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

#include "tesim/latency.hpp"

#include <stdexcept>
#include <string>

namespace tesim {

std::string_view to_string(AccountingMode m) {
    return m == AccountingMode::paper_literal ? "paper_literal" : "per_tile";
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::LI: return "LI";
        case Stage::LB: return "LB";
        case Stage::LIA: return "LIA";
        case Stage::LWA: return "LWA";
        case Stage::SA: return "SA";
        case Stage::BA: return "BA";
        case Stage::S: return "S";
        case Stage::SV: return "SV";
        case Stage::SOFTMAX: return "SOFTMAX";
        case Stage::FFN1: return "FFN1";
        case Stage::FFN2: return "FFN2";
        case Stage::FFN3: return "FFN3";
        case Stage::LN: return "LN";
    }
    return "?";
}

AccountingMode parse_accounting_mode(std::string_view text) {
    if (text == "paper_literal") return AccountingMode::paper_literal;
    if (text == "per_tile") return AccountingMode::per_tile;
    throw ConfigError("accounting mode must be paper_literal or per_tile, got " + std::string(text));
}

Cycles LatencyReport::stage_cycles(Stage s) const {
    for (const auto& st : stages) {
        if (st.stage == s) return st.cycles;
    }
    return 0;
}

Cycles pll(Cycles tc, Cycles ii, Cycles pd) {
    return (tc - 1) * ii + pd;
}

Cycles total_loop_latency(Cycles pll_cycles, Cycles outer_tc) {
    return pll_cycles * outer_tc;
}

std::vector<StageLatency> attention_stage_latencies(const ModelConfig& m, const HardwareConfig& hw,
                                                    AccountingMode mode) {
    const auto& p = hw.pipeline;
    const Cycles ii = static_cast<Cycles>(p.ii);
    const Cycles sl = static_cast<Cycles>(m.seq_len);
    const Cycles d = static_cast<Cycles>(m.d_model);
    const Cycles dk = static_cast<Cycles>(m.d_k());
    const Cycles ts = static_cast<Cycles>(hw.ts_mha);
    const Cycles tiles = d / ts;

    const Cycles pd_l = static_cast<Cycles>(p.pd_load());
    const Cycles pd_mha = tiles + static_cast<Cycles>(p.pd_arith());
    const Cycles pd_ba = static_cast<Cycles>(p.pd_ba_cc);
    const Cycles pd_s = dk;
    const Cycles pd_sv = sl;
    const Cycles reload = mode == AccountingMode::per_tile ? tiles : 1;

    return {
        {Stage::LI, total_loop_latency(pll(d, ii, pd_l), sl)},
        {Stage::LB, pll(dk, ii, pd_l)},
        {Stage::LIA, total_loop_latency(pll(ts, ii, pd_l), sl) * reload},
        {Stage::LWA, total_loop_latency(pll(dk, ii, pd_l), sl) * reload},
        {Stage::SA, total_loop_latency(pll(dk, ii, pd_mha), sl) * reload},
        {Stage::BA, total_loop_latency(pll(dk, ii, pd_ba), sl)},
        {Stage::S, total_loop_latency(pll(sl, ii, pd_s), sl)},
        {Stage::SV, total_loop_latency(pll(dk, ii, pd_sv), sl)},
    };
}

double cycles_to_ms(Cycles cycles, double clock_mhz) {
    return static_cast<double>(cycles) * 1e3 / (clock_mhz * 1e6);
}

LatencyTotal attention_total(const std::vector<StageLatency>& stages, double clock_mhz) {
    LatencyTotal t;
    for (const auto& s : stages) t.cycles += s.cycles;
    t.ms = cycles_to_ms(t.cycles, clock_mhz);
    return t;
}

std::vector<StageLatency> ffn_stage_latencies(const ModelConfig& m, const HardwareConfig& hw) {
    const auto dims = derived_dims(m, hw);
    const Cycles ii = static_cast<Cycles>(hw.pipeline.ii);
    const Cycles sl = static_cast<Cycles>(m.seq_len);
    const Cycles ts = static_cast<Cycles>(hw.ts_ffn);
    const Cycles pd = static_cast<Cycles>(hw.pipeline.pd_ffn_extra_cc);
    const auto ffn1_reuse = static_cast<Cycles>(dims.ffn1_reuse);
    const auto ffn23_reuse = static_cast<Cycles>(dims.ffn23_reuse);
    // FFN3 unrolls 4*ts wide, so it is entered a quarter as often as FFN2.
    return {
        {Stage::FFN1, total_loop_latency(pll(ts, ii, pd), sl) * ffn1_reuse, true, true},
        {Stage::FFN2, total_loop_latency(pll(ts, ii, pd), sl) * ffn23_reuse, true, true},
        {Stage::FFN3, total_loop_latency(pll(4 * ts, ii, pd), sl) * (ffn23_reuse / 4), true, true},
    };
}

std::vector<StageLatency> auxiliary_stage_latencies(const ModelConfig& m, const HardwareConfig& hw) {
    const Cycles ii = static_cast<Cycles>(hw.pipeline.ii);
    const Cycles sl = static_cast<Cycles>(m.seq_len);
    const Cycles d = static_cast<Cycles>(m.d_model);
    const Cycles dk = static_cast<Cycles>(m.d_k());
    const Cycles pd_ln = static_cast<Cycles>(hw.pipeline.pd_ffn_extra_cc);
    // Softmax: max, exponentiate-and-sum, and normalize passes over each row.
    return {
        {Stage::SOFTMAX, total_loop_latency(pll(sl, ii, dk), sl) * 3, true, true},
        {Stage::LN, 2 * total_loop_latency(pll(d, ii, pd_ln), sl), true, true},
    };
}

double total_ops(const ModelConfig& m) {
    const double sl = m.seq_len;
    const double d = m.d_model;
    const double per_layer = 2.0 * sl * d * d * 3.0  // QKV over all heads
                             + 2.0 * sl * sl * d      // Q K^T over all heads
                             + 2.0 * sl * sl * d      // S V over all heads
                             + 2.0 * sl * d * d       // FFN1
                             + 2.0 * sl * d * 4 * d   // FFN2
                             + 2.0 * sl * 4 * d * d;  // FFN3
    return per_layer * m.num_layers;
}

double gops(double ops, double latency_ms) {
    if (!(latency_ms > 0.0)) throw std::invalid_argument("gops: latency must be positive");
    return ops / (latency_ms * 1e-3) / 1e9;
}

LatencyReport encoder_latency(const ModelConfig& m, const HardwareConfig& hw, AccountingMode mode) {
    LatencyReport r;
    r.mode = mode;
    r.clock_mhz = hw.clock_mhz;
    r.num_layers = m.num_layers;
    r.stages = attention_stage_latencies(m, hw, mode);
    for (auto& s : auxiliary_stage_latencies(m, hw)) r.stages.push_back(s);
    for (auto& s : ffn_stage_latencies(m, hw)) r.stages.push_back(s);
    for (const auto& s : r.stages) r.per_layer_cc += s.cycles;
    r.total_cc = r.per_layer_cc * static_cast<Cycles>(m.num_layers);
    r.total_ms = cycles_to_ms(r.total_cc, hw.clock_mhz);
    r.total_ops = total_ops(m);
    r.gops = r.total_ms > 0.0 ? gops(r.total_ops, r.total_ms) : 0.0;
    return r;
}

}  // namespace tesim
