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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tesim/config.hpp"
#include "tesim/dse.hpp"
#include "tesim/latency.hpp"
#include "tesim/resources.hpp"

namespace tesim {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOpConvention = "2 ops per multiply-accumulate over QKV, QK, SV, FFN1, FFN2, FFN3";

Json config_to_json(const ParsedConfig& cfg);
Json latency_to_json(const LatencyReport& r);
Json resources_to_json(const ResourceReport& r, const DeviceProfile& dev);
Json dse_point_to_json(const DsePoint& p);

/// Columns: SL, d_model, heads, layers, format, latency (ms), GOPS.
std::string summary_table(const ModelConfig& m, FixedFormat f, const std::vector<LatencyReport>& rows);
/// One row per stage with cycles for one layer, then per-layer and total.
std::string stage_table(const LatencyReport& r);
/// Model estimate next to the synthesized reference build, with the gap.
std::string resource_table(const ResourceReport& r, const DeviceProfile& dev);
std::string dse_table(const std::vector<DsePoint>& points, const std::optional<DsePoint>& best);

/// Right-aligns every column to its widest cell; first row is the header.
std::string render_table(const std::vector<std::vector<std::string>>& rows);

/// printf("%.*f").
std::string fixed(double v, int digits);

}  // namespace tesim
