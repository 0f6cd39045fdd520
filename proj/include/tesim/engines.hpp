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
#include <span>
#include <string_view>
#include <vector>

#include "tesim/config.hpp"
#include "tesim/fixed_point.hpp"
#include "tesim/reference.hpp"
#include "tesim/weights.hpp"

// Fixed-point functional model of the accelerator's compute engines.
//
// Attention: per head, QKV (tiled over d_model in ts_mha-wide column tiles),
// QK (untiled), softmax, SV (untiled). FFN: three engines tiled along both
// matrix dimensions in ts_ffn x ts_ffn blocks. Accumulation is exact in a
// 64-bit accumulator and rounded once at the store point, unless
// per_tile_requantize is set, in which case every tile's partial sum is
// rounded into an f-format buffer.

namespace tesim {

enum class EngineId { qkv, qk, softmax, sv, ffn1, ffn2, ffn3, layernorm };

std::string_view to_string(EngineId e);

enum class FfnKind { ffn1, ffn2, ffn3 };

struct TripCounts {
    int outer = 0;
    int middle = 0;
    int inner = 0;

    friend bool operator==(const TripCounts&, const TripCounts&) = default;
};

/// One engine invocation. head is -1 for engines shared across heads.
struct TraceEntry {
    EngineId engine = EngineId::qkv;
    int layer = 0;
    int head = -1;
    int invocation = 0;
    int in_tile = 0;
    int out_tile = 0;
    TripCounts trips;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct ScheduleTrace {
    std::vector<TraceEntry> entries;

    /// Number of invocations of `engine`, optionally filtered by layer/head (-1 = any).
    std::size_t count(EngineId engine, int layer = -1, int head = -1) const;

    friend bool operator==(const ScheduleTrace&, const ScheduleTrace&) = default;
};

struct QkvOutput {
    FxTensor q, k, v;
};

QkvOutput qkv_ce(const FxTensor& x, const HeadWeights<FxTensor>& w, const HardwareConfig& hw,
                 ScheduleTrace* trace = nullptr);

/// S = requantize(Q K^T / divisor); divisor is sqrt(d_k) or d_model.
FxTensor qk_ce(const FxTensor& q, const FxTensor& k, ScaleMode mode, int d_model);

/// Row-wise softmax evaluated in double precision and requantized.
FxTensor softmax_fx(const FxTensor& scores, KeyMask mask = {});

FxTensor sv_ce(const FxTensor& s, const FxTensor& v);

FxTensor ffn_ce(FfnKind kind, const FxTensor& x, const FxTensor& w, const FxTensor& b,
                const HardwareConfig& hw, Activation act = Activation::relu,
                ScheduleTrace* trace = nullptr);

std::vector<Raw> layernorm_fx(std::span<const Raw> row, std::span<const Raw> gamma,
                              std::span<const Raw> beta, FixedFormat f);

struct ForwardResult {
    FxTensor output;
    ScheduleTrace trace;
};

/// Simulated accelerator instance. On-chip buffers are sized once from
/// hw.max_model; reconfigure() only swaps the active runtime parameters.
class Engine {
public:
    explicit Engine(const HardwareConfig& hw);
    Engine(const HardwareConfig& hw, const ModelConfig& active);

    /// Throws ConfigError if m violates any constraint or maximum.
    void reconfigure(const ModelConfig& m);

    const ModelConfig& active() const { return active_; }
    const HardwareConfig& hardware() const { return hw_; }

    /// Heads are evaluated on up to n threads. Results do not depend on n.
    void set_threads(int n) { threads_ = n; }

    ForwardResult forward(const FxTensor& x, const FxWeights& w, KeyMask mask = {});

    struct BufferInfo {
        std::string_view name;
        const void* base = nullptr;
        std::size_t capacity = 0;

        friend bool operator==(const BufferInfo&, const BufferInfo&) = default;
    };
    std::vector<BufferInfo> buffer_inventory() const;

private:
    void allocate();
    void run_head(const FxWeights& w, std::size_t layer, std::size_t head, KeyMask mask,
                  std::vector<TraceEntry>& trace);

    HardwareConfig hw_;
    ModelConfig active_;
    int threads_ = 1;

    std::size_t sl_max_ = 0;
    std::size_t d_max_ = 0;
    std::size_t h_max_ = 0;

    std::vector<Raw> layer_in_;      // SL_max x d_max
    std::vector<Raw> x_tile_;        // h_max x SL_max x ts_mha
    std::vector<Raw> w_tile_[3];     // d_max x ts_mha, rows partitioned by head
    std::vector<AccRaw> qkv_acc_[3];  // SL_max x d_max
    std::vector<Raw> qkv_[3];        // SL_max x d_max
    std::vector<Raw> bias_reg_[3];   // d_max
    std::vector<Raw> score_;         // h_max x SL_max x SL_max
    std::vector<Raw> attn_;          // SL_max x d_max, concatenated SV outputs
    std::vector<Raw> ffn_x_tile_;    // SL_max x ts_ffn
    std::vector<Raw> ffn_w_tile_;    // ts_ffn x 4 ts_ffn
    std::vector<AccRaw> ffn_acc_;    // SL_max x 4 d_max
    std::vector<Raw> sub1_;          // SL_max x d_max, FFN1 output and LN1 output
    std::vector<Raw> ln1_;           // SL_max x d_max
    std::vector<Raw> hidden_;        // SL_max x 4 d_max
    std::vector<Raw> sub2_;          // SL_max x d_max
};

ForwardResult encoder_forward_tiled(const FxTensor& x, const FxWeights& w, const ModelConfig& m,
                                    const HardwareConfig& hw, KeyMask mask = {}, int threads = 1);

}  // namespace tesim
