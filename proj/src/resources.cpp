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

#include "tesim/resources.hpp"

#include <cmath>

namespace tesim {

PeCounts pe_counts(const ModelConfig& m, const HardwareConfig& hw) {
    PeCounts p;
    p.heads = m.num_heads;
    p.qkv_per_head = 3 * std::int64_t{hw.ts_mha};
    p.qk_per_head = m.d_k();
    p.sv_per_head = m.seq_len;
    p.ffn1 = hw.ts_ffn;
    p.ffn2 = hw.ts_ffn;
    p.ffn3 = 4 * std::int64_t{hw.ts_ffn};
    return p;
}

std::int64_t dsp_estimate(const ModelConfig& m, const HardwareConfig& hw) {
    return pe_counts(m, hw).total() + m.d_model;
}

double bram_blocks(std::int64_t bits) {
    constexpr std::int64_t kBlockBits = 36864;
    if (bits <= 0) return 0.0;
    if (bits <= kBlockBits / 2) return 0.5;
    return static_cast<double>((bits + kBlockBits - 1) / kBlockBits);
}

std::vector<BufferSpec> buffer_inventory(const HardwareConfig& hw) {
    const auto& mx = hw.max_model;
    const std::int64_t sl = mx.seq_len;
    const std::int64_t d = mx.d_model;
    const std::int64_t h = mx.num_heads;
    const std::int64_t dk = mx.num_heads > 0 ? (d + h - 1) / h : d;
    const std::int64_t ts = hw.ts_mha;
    const std::int64_t tf = hw.ts_ffn;
    return {
        {"mha_input_tile", h, sl, ts},
        {"mha_weight_tile", 3 * h, dk, ts},
        {"qkv_sv", 4 * h, sl, dk},
        {"score", h, sl, sl},
        {"qkv_bias", 3, 1, d},
        {"ffn_weight_tile", 1, tf, 4 * tf},
        {"ffn_input_tile", 1, sl, tf},
        {"attention_concat", 1, sl, d},
        {"ffn1_ln1_out", 1, sl, d},
        {"ffn2_out", 1, sl, 4 * d},
        {"ffn3_ln2_out", 1, sl, d},
        {"ffn_bias_d", 2, 1, d},
        {"ffn_bias_4d", 1, 1, 4 * d},
        {"ln_params", 4, 1, d},
    };
}

double bram_estimate([[maybe_unused]] const ModelConfig& m, const HardwareConfig& hw) {
    const std::int64_t width = hw.fx_format.width_bits;
    double total = 0.0;
    for (const auto& b : buffer_inventory(hw)) {
        total += static_cast<double>(b.count) * bram_blocks(b.rows * b.cols * width);
    }
    return total;
}

ResourceReport budget_check(ResourceReport r, const DeviceProfile& dev) {
    r.device = dev.name;
    r.dsp_utilization = dev.dsp_total > 0 ? static_cast<double>(r.dsp_estimate) / dev.dsp_total : 0.0;
    r.bram_utilization = dev.bram36_total > 0 ? r.bram36_estimate / dev.bram36_total : 0.0;
    r.feasible = r.dsp_estimate <= dev.dsp_total && r.bram36_estimate <= dev.bram36_total;
    return r;
}

ResourceReport estimate_resources(const ModelConfig& m, const HardwareConfig& hw,
                                  const DeviceProfile& dev) {
    ResourceReport r;
    r.pe = pe_counts(m, hw);
    r.dsp_overhead = m.d_model;
    r.dsp_estimate = dsp_estimate(m, hw);
    r.bram36_estimate = bram_estimate(m, hw);
    return budget_check(r, dev);
}

}  // namespace tesim
