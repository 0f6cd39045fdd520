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

#include "tesim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace tesim {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Json config_to_json(const ParsedConfig& cfg) {
    return Json::parse(render_config(cfg));
}

Json latency_to_json(const LatencyReport& r) {
    Json stages = Json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"stage", std::string(to_string(s.stage))},
                          {"cycles", s.cycles},
                          {"model_derived", s.model_derived}});
    }
    return Json{{"accounting_mode", std::string(to_string(r.mode))},
                {"stages_per_layer", stages},
                {"num_layers", r.num_layers},
                {"per_layer_cc", r.per_layer_cc},
                {"total_cc", r.total_cc},
                {"clock_mhz", r.clock_mhz},
                {"total_ms", r.total_ms},
                {"total_ops", r.total_ops},
                {"op_convention", kOpConvention},
                {"gops", r.gops}};
}

Json resources_to_json(const ResourceReport& r, const DeviceProfile& dev) {
    return Json{
        {"pe_counts",
         {{"heads", r.pe.heads},
          {"qkv_per_head", r.pe.qkv_per_head},
          {"qk_per_head", r.pe.qk_per_head},
          {"sv_per_head", r.pe.sv_per_head},
          {"ffn1", r.pe.ffn1},
          {"ffn2", r.pe.ffn2},
          {"ffn3", r.pe.ffn3},
          {"total", r.pe.total()}}},
        {"dsp_overhead", r.dsp_overhead},
        {"dsp_estimate", r.dsp_estimate},
        {"dsp_utilization", r.dsp_utilization},
        {"bram36_estimate", r.bram36_estimate},
        {"bram_utilization", r.bram_utilization},
        {"feasible", r.feasible},
        {"device",
         {{"name", dev.name},
          {"dsp_total", dev.dsp_total},
          {"lut_total", dev.lut_total},
          {"bram36_total", dev.bram36_total}}},
        {"synthesized_reference",
         {{"dsp", kSynthesizedDsp},
          {"dsp_fraction", kSynthesizedDspFraction},
          {"estimate_minus_synthesized", r.dsp_estimate - kSynthesizedDsp}}}};
}

Json dse_point_to_json(const DsePoint& p) {
    Json j{{"tiles_mha", p.tiles_mha}, {"tiles_ffn", p.tiles_ffn}, {"ts_mha", p.ts_mha},
           {"ts_ffn", p.ts_ffn},       {"clock_mhz", p.clock_mhz}, {"feasible", p.feasible}};
    j["objective_value"] = p.objective_value ? Json(*p.objective_value) : Json(nullptr);
    j["error"] = p.error;
    if (p.ts_mha > 0 && p.ts_ffn > 0 && !p.latency.stages.empty()) {
        j["total_cc"] = p.latency.total_cc;
        j["total_ms"] = p.latency.total_ms;
        j["dsp_estimate"] = p.resources.dsp_estimate;
        j["bram36_estimate"] = p.resources.bram36_estimate;
    }
    return j;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream out;
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out << "  ";
            out << std::string(width[c] - r[c].size(), ' ') << r[c];
        }
        out << '\n';
    }
    return out.str();
}

std::string summary_table(const ModelConfig& m, FixedFormat f, const std::vector<LatencyReport>& rows) {
    std::vector<std::vector<std::string>> t{
        {"mode", "SL", "d_model", "heads", "layers", "format", "latency_ms", "GOPS"}};
    for (const auto& r : rows) {
        t.push_back({std::string(to_string(r.mode)), std::to_string(m.seq_len), std::to_string(m.d_model),
                     std::to_string(m.num_heads), std::to_string(m.num_layers), f.name(),
                     fixed(r.total_ms, 3), fixed(r.gops, 2)});
    }
    return render_table(t);
}

std::string stage_table(const LatencyReport& r) {
    std::vector<std::vector<std::string>> t{{"stage", "cycles", "source"}};
    for (const auto& s : r.stages) {
        t.push_back({std::string(to_string(s.stage)), std::to_string(s.cycles),
                     s.model_derived ? "extrapolated" : "stage equation"});
    }
    t.push_back({"per_layer", std::to_string(r.per_layer_cc), ""});
    t.push_back({"total", std::to_string(r.total_cc), "x" + std::to_string(r.num_layers) + " layers"});
    return render_table(t);
}

std::string resource_table(const ResourceReport& r, const DeviceProfile& dev) {
    std::vector<std::vector<std::string>> t{{"resource", "value", "utilization"}};
    t.push_back({"PE QKV per head", std::to_string(r.pe.qkv_per_head), ""});
    t.push_back({"PE QK per head", std::to_string(r.pe.qk_per_head), ""});
    t.push_back({"PE SV per head", std::to_string(r.pe.sv_per_head), ""});
    t.push_back({"PE FFN1", std::to_string(r.pe.ffn1), ""});
    t.push_back({"PE FFN2", std::to_string(r.pe.ffn2), ""});
    t.push_back({"PE FFN3", std::to_string(r.pe.ffn3), ""});
    t.push_back({"DSP estimate", std::to_string(r.dsp_estimate), fixed(100.0 * r.dsp_utilization, 1) + "%"});
    t.push_back({"DSP synthesized (reference build)", std::to_string(kSynthesizedDsp),
                 fixed(100.0 * kSynthesizedDspFraction, 0) + "%"});
    t.push_back({"DSP gap (estimate - synthesized)", std::to_string(r.dsp_estimate - kSynthesizedDsp), ""});
    t.push_back({"BRAM36 estimate", fixed(r.bram36_estimate, 1), fixed(100.0 * r.bram_utilization, 1) + "%"});
    t.push_back({"device", dev.name, r.feasible ? "fits" : "over budget"});
    return render_table(t);
}

std::string dse_table(const std::vector<DsePoint>& points, const std::optional<DsePoint>& best) {
    std::vector<std::vector<std::string>> t{
        {"tiles_mha", "tiles_ffn", "ts_mha", "ts_ffn", "MHz", "total_cc", "latency_ms", "DSP", "feasible", ""}};
    for (const auto& p : points) {
        const bool evaluated = !p.latency.stages.empty();
        const bool chosen = best && best->tiles_mha == p.tiles_mha && best->tiles_ffn == p.tiles_ffn;
        t.push_back({std::to_string(p.tiles_mha), std::to_string(p.tiles_ffn),
                     evaluated ? std::to_string(p.ts_mha) : "-", evaluated ? std::to_string(p.ts_ffn) : "-",
                     fixed(p.clock_mhz, 1), evaluated ? std::to_string(p.latency.total_cc) : "-",
                     evaluated ? fixed(p.latency.total_ms, 3) : "-",
                     evaluated ? std::to_string(p.resources.dsp_estimate) : "-", p.feasible ? "yes" : "no",
                     chosen ? "<- selected" : p.error});
    }
    return render_table(t);
}

}  // namespace tesim
