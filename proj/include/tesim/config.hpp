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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tesim {

/// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Activation { relu, gelu };
enum class ScaleMode { sqrt_dk, d_model };

std::string_view to_string(Activation a);
std::string_view to_string(ScaleMode s);

/// Signed two's-complement Q-format: width_bits total, frac_bits after the point.
struct FixedFormat {
    int width_bits = 8;
    int frac_bits = 4;

    std::int64_t min_raw() const { return -(std::int64_t{1} << (width_bits - 1)); }
    std::int64_t max_raw() const { return (std::int64_t{1} << (width_bits - 1)) - 1; }
    double lsb() const;
    double min_value() const { return static_cast<double>(min_raw()) * lsb(); }
    double max_value() const { return static_cast<double>(max_raw()) * lsb(); }
    bool valid() const;
    /// "Q4.4", "Q8.8", ...
    std::string name() const;

    friend bool operator==(const FixedFormat&, const FixedFormat&) = default;
};

/// Runtime-programmable transformer hyperparameters.
struct ModelConfig {
    int d_model = 0;
    int num_heads = 0;
    int num_layers = 0;
    int seq_len = 0;
    Activation activation = Activation::relu;
    ScaleMode scale_mode = ScaleMode::sqrt_dk;
    bool use_residual = true;
    bool mask_enabled = false;

    int d_k() const { return d_model / num_heads; }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Cycle constants of the analytical latency model.
struct PipelineConstants {
    int axi_cc = 7;
    int addr_cc = 1;
    int load_cc = 1;
    int store_cc = 1;
    int convert_cc = 3;
    int mult_cc = 2;
    int add_cc = 1;
    int pd_ba_cc = 3;
    int pd_ffn_extra_cc = 5;
    int ii = 1;

    /// Off-chip load depth: AXI handshake + address + load + store + float->fixed.
    int pd_load() const { return axi_cc + addr_cc + load_cc + store_cc + convert_cc; }
    /// Arithmetic tail of one MAC iteration: load + multiply + add + store.
    int pd_arith() const { return load_cc + mult_cc + add_cc + store_cc; }

    friend bool operator==(const PipelineConstants&, const PipelineConstants&) = default;
};

/// Synthesis-time parameters. Tile sizes and maxima cannot change at runtime.
struct HardwareConfig {
    int ts_mha = 0;
    int ts_ffn = 0;
    double clock_mhz = 0.0;
    FixedFormat fx_format{};
    ModelConfig max_model{};
    bool per_tile_requantize = false;
    PipelineConstants pipeline{};

    friend bool operator==(const HardwareConfig&, const HardwareConfig&) = default;
};

struct DeviceProfile {
    std::string name;
    std::int64_t dsp_total = 0;
    std::int64_t lut_total = 0;
    std::int64_t bram36_total = 0;

    friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

/// Xilinx Alveo U55C budgets.
DeviceProfile u55c_profile();

struct DerivedDims {
    int d_k = 0;
    int tiles_mha = 0;
    int tiles_ffn = 0;
    std::int64_t ffn1_reuse = 0;
    std::int64_t ffn23_reuse = 0;

    friend bool operator==(const DerivedDims&, const DerivedDims&) = default;
};

struct ValidationResult {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const;
};

struct ParsedConfig {
    ModelConfig model;
    HardwareConfig hardware;
    DeviceProfile device;

    friend bool operator==(const ParsedConfig&, const ParsedConfig&) = default;
};

/// Parses the JSON configuration document. Throws ConfigError on syntax
/// errors (with byte position), unknown keys, and missing required keys.
ParsedConfig parse_config(std::string_view text);
ParsedConfig load_config(const std::string& path);

/// Inverse of parse_config; every field is written explicitly.
std::string render_config(const ParsedConfig& cfg);

/// Collects every violated constraint. Never throws.
ValidationResult validate(const ModelConfig& m, const HardwareConfig& hw);

/// Throws ConfigError listing all violations when validation fails.
void require_valid(const ModelConfig& m, const HardwareConfig& hw);

/// Precondition: validate(m, hw).ok().
DerivedDims derived_dims(const ModelConfig& m, const HardwareConfig& hw);

}  // namespace tesim
