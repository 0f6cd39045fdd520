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
#include <string>
#include <vector>

#include "tesim/config.hpp"

namespace tesim {

/// Processing elements per engine; one PE maps to one DSP48 slice.
struct PeCounts {
    int heads = 0;
    std::int64_t qkv_per_head = 0;  // 3 * ts_mha
    std::int64_t qk_per_head = 0;   // d_k
    std::int64_t sv_per_head = 0;   // SL
    std::int64_t ffn1 = 0;          // ts_ffn
    std::int64_t ffn2 = 0;          // ts_ffn
    std::int64_t ffn3 = 0;          // 4 * ts_ffn

    std::int64_t total() const {
        return heads * (qkv_per_head + qk_per_head + sv_per_head) + ffn1 + ffn2 + ffn3;
    }

    friend bool operator==(const PeCounts&, const PeCounts&) = default;
};

/// Synthesized DSP count of the reference U55C build (all Table I tests).
inline constexpr std::int64_t kSynthesizedDsp = 3612;
inline constexpr double kSynthesizedDspFraction = 0.40;

struct ResourceReport {
    PeCounts pe;
    std::int64_t dsp_overhead = 0;  // d_model term for projection/normalization arithmetic
    std::int64_t dsp_estimate = 0;
    double bram36_estimate = 0.0;
    double dsp_utilization = 0.0;
    double bram_utilization = 0.0;
    bool feasible = true;
    std::string device;
};

PeCounts pe_counts(const ModelConfig& m, const HardwareConfig& hw);

/// 3 h ts_mha + h (d_k + SL) + 6 ts_ffn + d_model.
std::int64_t dsp_estimate(const ModelConfig& m, const HardwareConfig& hw);

/// 36 Kb blocks for a buffer of `bits`: 0.5 when it fits a half block,
/// otherwise ceil(bits / 36864).
double bram_blocks(std::int64_t bits);

struct BufferSpec {
    std::string name;
    std::int64_t count = 1;  // identical banks
    std::int64_t rows = 0;
    std::int64_t cols = 0;
};

/// On-chip buffer inventory at synthesis-time maxima.
std::vector<BufferSpec> buffer_inventory(const HardwareConfig& hw);

double bram_estimate(const ModelConfig& m, const HardwareConfig& hw);

/// Fills utilization and feasibility: dsp and bram both within budget.
ResourceReport budget_check(ResourceReport r, const DeviceProfile& dev);

ResourceReport estimate_resources(const ModelConfig& m, const HardwareConfig& hw,
                                  const DeviceProfile& dev);

}  // namespace tesim
