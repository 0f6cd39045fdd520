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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tesim/config.hpp"
#include "tesim/latency.hpp"
#include "tesim/resources.hpp"

namespace tesim {

enum class Objective { min_latency, min_latency_then_min_dsp };

std::string_view to_string(Objective o);
Objective parse_objective(std::string_view text);

/// (tiles_mha, tiles_ffn) -> clock in MHz.
using FrequencyTable = std::map<std::pair<int, int>, double>;

struct SweepSpec {
    std::vector<int> tiles_mha_candidates;
    std::vector<int> tiles_ffn_candidates;
    FrequencyTable frequency_table;
    /// Used for pairs absent from the table; falls back to the hardware clock.
    std::optional<double> default_clock_mhz;
    Objective objective = Objective::min_latency;
    AccountingMode accounting_mode = AccountingMode::per_tile;
    /// Largest tile width the toolchain can compile; unset means no limit.
    std::optional<int> max_ts;
    /// min_latency_then_min_dsp only: points within this relative latency
    /// of the fastest feasible point compete on DSP count.
    double latency_tolerance = 0.0;
};

/// Throws ConfigError: empty candidate lists, non-positive candidates,
/// no usable clock for some pair, negative tolerance.
void validate_sweep(const SweepSpec& spec, const HardwareConfig& hw_template);

SweepSpec parse_sweep_spec(std::string_view json_text);
SweepSpec load_sweep_spec(const std::string& path);

struct DsePoint {
    int tiles_mha = 0;
    int tiles_ffn = 0;
    int ts_mha = 0;
    int ts_ffn = 0;
    double clock_mhz = 0.0;
    LatencyReport latency;
    ResourceReport resources;
    bool feasible = false;
    /// Latency in ms; present only for feasible points.
    std::optional<double> objective_value;
    /// Why the point is infeasible; empty otherwise.
    std::string error;
};

/// One point per candidate pair in lexicographic (tiles_mha, tiles_ffn)
/// order. Candidates that fail to divide d_model are kept with an error.
std::vector<DsePoint> sweep(const ModelConfig& m, const HardwareConfig& hw_template,
                            const SweepSpec& spec, const DeviceProfile& dev, int threads = 1);

/// Best feasible point, or nullopt for an infeasible sweep. Independent of
/// the order of `points`.
std::optional<DsePoint> select_best(const std::vector<DsePoint>& points, Objective objective,
                                    double latency_tolerance = 0.0);

}  // namespace tesim
