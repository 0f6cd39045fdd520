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

#include "tesim/dse.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "tesim/parallel.hpp"

namespace tesim {

using nlohmann::json;

std::string_view to_string(Objective o) {
    return o == Objective::min_latency ? "min_latency" : "min_latency_then_min_dsp";
}

Objective parse_objective(std::string_view text) {
    if (text == "min_latency") return Objective::min_latency;
    if (text == "min_latency_then_min_dsp") return Objective::min_latency_then_min_dsp;
    throw ConfigError("objective must be min_latency or min_latency_then_min_dsp, got " +
                      std::string(text));
}

namespace {

double clock_for(const SweepSpec& spec, const HardwareConfig& hw, int tm, int tf) {
    if (auto it = spec.frequency_table.find({tm, tf}); it != spec.frequency_table.end()) {
        return it->second;
    }
    if (spec.default_clock_mhz) return *spec.default_clock_mhz;
    return hw.clock_mhz;
}

std::vector<int> candidate_list(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ConfigError(std::string("sweep: missing required key ") + key);
    const auto& v = doc.at(key);
    if (!v.is_array()) throw ConfigError(std::string("sweep: ") + key + " must be an array");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) {
            throw ConfigError(std::string("sweep: ") + key + " entries must be integers");
        }
        out.push_back(e.get<int>());
    }
    return out;
}

}  // namespace

void validate_sweep(const SweepSpec& spec, const HardwareConfig& hw) {
    if (spec.tiles_mha_candidates.empty()) throw ConfigError("sweep: tiles_mha candidates empty");
    if (spec.tiles_ffn_candidates.empty()) throw ConfigError("sweep: tiles_ffn candidates empty");
    for (int t : spec.tiles_mha_candidates) {
        if (t < 1) throw ConfigError("sweep: tiles_mha candidate must be >= 1");
    }
    for (int t : spec.tiles_ffn_candidates) {
        if (t < 1) throw ConfigError("sweep: tiles_ffn candidate must be >= 1");
    }
    if (spec.latency_tolerance < 0.0) throw ConfigError("sweep: latency_tolerance must be >= 0");
    if (spec.max_ts && *spec.max_ts < 1) throw ConfigError("sweep: max_ts must be >= 1");
    for (const auto& [key, mhz] : spec.frequency_table) {
        if (!(mhz > 0.0)) throw ConfigError("sweep: frequency table entries must be positive");
    }
    for (int tm : spec.tiles_mha_candidates) {
        for (int tf : spec.tiles_ffn_candidates) {
            if (!(clock_for(spec, hw, tm, tf) > 0.0)) {
                throw ConfigError("sweep: no clock for candidate (" + std::to_string(tm) + ", " +
                                  std::to_string(tf) +
                                  "): frequency table lacks it and no default clock is set");
            }
        }
    }
}

SweepSpec parse_sweep_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("sweep: syntax error at byte " + std::to_string(e.byte));
    }
    if (!doc.is_object()) throw ConfigError("sweep: document must be an object");
    static const std::set<std::string> known = {
        "tiles_mha", "tiles_ffn", "frequency_table", "clock_mhz", "objective",
        "accounting_mode", "max_ts", "latency_tolerance"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) throw ConfigError("sweep: unknown key " + key);
    }
    SweepSpec s;
    try {
        s.tiles_mha_candidates = candidate_list(doc, "tiles_mha");
        s.tiles_ffn_candidates = candidate_list(doc, "tiles_ffn");
        if (doc.contains("clock_mhz")) s.default_clock_mhz = doc.at("clock_mhz").get<double>();
        if (doc.contains("objective")) s.objective = parse_objective(doc.at("objective").get<std::string>());
        if (doc.contains("accounting_mode")) {
            s.accounting_mode = parse_accounting_mode(doc.at("accounting_mode").get<std::string>());
        }
        if (doc.contains("max_ts")) s.max_ts = doc.at("max_ts").get<int>();
        if (doc.contains("latency_tolerance")) s.latency_tolerance = doc.at("latency_tolerance").get<double>();
        if (doc.contains("frequency_table")) {
            for (const auto& e : doc.at("frequency_table")) {
                const std::pair key{e.at("tiles_mha").get<int>(), e.at("tiles_ffn").get<int>()};
                if (s.frequency_table.count(key)) throw ConfigError("sweep: duplicate frequency table entry");
                s.frequency_table[key] = e.at("mhz").get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
    return s;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open sweep file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sweep_spec(ss.str());
}

std::vector<DsePoint> sweep(const ModelConfig& m, const HardwareConfig& hw_template,
                            const SweepSpec& spec, const DeviceProfile& dev, int threads) {
    validate_sweep(spec, hw_template);
    auto tm_list = spec.tiles_mha_candidates;
    auto tf_list = spec.tiles_ffn_candidates;
    std::sort(tm_list.begin(), tm_list.end());
    tm_list.erase(std::unique(tm_list.begin(), tm_list.end()), tm_list.end());
    std::sort(tf_list.begin(), tf_list.end());
    tf_list.erase(std::unique(tf_list.begin(), tf_list.end()), tf_list.end());

    std::vector<DsePoint> points;
    for (int tm : tm_list) {
        for (int tf : tf_list) {
            DsePoint p;
            p.tiles_mha = tm;
            p.tiles_ffn = tf;
            points.push_back(p);
        }
    }

    parallel_for(points.size(), threads, [&](std::size_t i) {
        auto& p = points[i];
        p.clock_mhz = clock_for(spec, hw_template, p.tiles_mha, p.tiles_ffn);
        if (m.d_model % p.tiles_mha != 0 || m.d_model % p.tiles_ffn != 0) {
            p.error = "tile count does not divide d_model";
            return;
        }
        HardwareConfig hw = hw_template;
        hw.ts_mha = m.d_model / p.tiles_mha;
        hw.ts_ffn = m.d_model / p.tiles_ffn;
        hw.clock_mhz = p.clock_mhz;
        p.ts_mha = hw.ts_mha;
        p.ts_ffn = hw.ts_ffn;
        if (auto v = validate(m, hw); !v.ok()) {
            p.error = v.joined();
            return;
        }
        p.latency = encoder_latency(m, hw, spec.accounting_mode);
        p.resources = estimate_resources(m, hw, dev);
        if (spec.max_ts && std::max(hw.ts_mha, hw.ts_ffn) > *spec.max_ts) {
            p.error = "tile width exceeds max_ts";
            return;
        }
        if (!p.resources.feasible) {
            p.error = "exceeds device budget";
            return;
        }
        p.feasible = true;
        p.objective_value = p.latency.total_ms;
    });
    return points;
}

std::optional<DsePoint> select_best(const std::vector<DsePoint>& points, Objective objective,
                                    double latency_tolerance) {
    std::vector<const DsePoint*> feasible;
    for (const auto& p : points) {
        if (p.feasible && p.objective_value) feasible.push_back(&p);
    }
    if (feasible.empty()) return std::nullopt;

    auto key = [](const DsePoint* p) {
        return std::tuple{*p->objective_value, p->resources.dsp_estimate, p->tiles_mha, p->tiles_ffn};
    };
    if (objective == Objective::min_latency) {
        return **std::min_element(feasible.begin(), feasible.end(),
                                  [&](auto* a, auto* b) { return key(a) < key(b); });
    }
    double fastest = *feasible.front()->objective_value;
    for (auto* p : feasible) fastest = std::min(fastest, *p->objective_value);
    const double limit = fastest * (1.0 + latency_tolerance);
    auto dsp_key = [](const DsePoint* p) {
        return std::tuple{p->resources.dsp_estimate, *p->objective_value, p->tiles_mha, p->tiles_ffn};
    };
    const DsePoint* best = nullptr;
    for (auto* p : feasible) {
        if (*p->objective_value > limit) continue;
        if (!best || dsp_key(p) < dsp_key(best)) best = p;
    }
    return *best;
}

}  // namespace tesim
