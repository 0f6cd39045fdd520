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

#include "tesim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tesim {

using nlohmann::ordered_json;

std::string_view to_string(Activation a) {
    return a == Activation::relu ? "relu" : "gelu";
}

std::string_view to_string(ScaleMode s) {
    return s == ScaleMode::sqrt_dk ? "sqrt_dk" : "d_model";
}

double FixedFormat::lsb() const {
    return std::ldexp(1.0, -frac_bits);
}

bool FixedFormat::valid() const {
    return (width_bits == 8 || width_bits == 16) && frac_bits > 0 && frac_bits < width_bits;
}

std::string FixedFormat::name() const {
    return "Q" + std::to_string(width_bits - frac_bits) + "." + std::to_string(frac_bits);
}

DeviceProfile u55c_profile() {
    return DeviceProfile{"xcu55c", 9024, 1303680, 2016};
}

std::string ValidationResult::joined() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

namespace {

// Reads one JSON object section, rejecting keys that are never consumed.
class Section {
public:
    Section(const ordered_json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError("section " + path_ + " must be a JSON object");
        }
    }

    bool has(const char* key) const { return obj_.contains(key); }

    const ordered_json& raw(const char* key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    template <class T>
    T required(const char* key) {
        if (!has(key)) {
            throw ConfigError(std::string("missing required key ") + key + " in section " + path_);
        }
        return get<T>(key);
    }

    template <class T>
    T optional(const char* key, T fallback) {
        return has(key) ? get<T>(key) : fallback;
    }

    void finish() const {
        for (const auto& item : obj_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError("unknown key " + item.key() + " in section " + path_);
            }
        }
    }

private:
    template <class T>
    T get(const char* key) {
        const auto& v = raw(key);
        try {
            if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) throw ConfigError("");
                auto x = v.get<std::int64_t>();
                if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("");
                return static_cast<int>(x);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                if (!v.is_number_integer()) throw ConfigError("");
                return v.get<std::int64_t>();
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError("");
                return v.get<double>();
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError("");
                return v.get<bool>();
            } else {
                if (!v.is_string()) throw ConfigError("");
                return v.get<std::string>();
            }
        } catch (const ConfigError&) {
            throw ConfigError("key " + path_ + "." + key + " has the wrong type");
        }
    }

    const ordered_json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

const ordered_json& empty_object() {
    static const ordered_json e = ordered_json::object();
    return e;
}

const ordered_json& section_or_empty(const ordered_json& root, const char* key) {
    return root.contains(key) ? root.at(key) : empty_object();
}

ModelConfig read_model(Section& s, const ModelConfig& defaults) {
    ModelConfig m = defaults;
    m.d_model = s.required<int>("d_model");
    m.num_heads = s.required<int>("num_heads");
    m.num_layers = s.required<int>("num_layers");
    m.seq_len = s.required<int>("seq_len");
    auto act = s.optional<std::string>("activation", std::string(to_string(m.activation)));
    if (act == "relu") {
        m.activation = Activation::relu;
    } else if (act == "gelu") {
        m.activation = Activation::gelu;
    } else {
        throw ConfigError("activation must be relu or gelu, got " + act);
    }
    auto scale = s.optional<std::string>("scale_mode", std::string(to_string(m.scale_mode)));
    if (scale == "sqrt_dk") {
        m.scale_mode = ScaleMode::sqrt_dk;
    } else if (scale == "d_model") {
        m.scale_mode = ScaleMode::d_model;
    } else {
        throw ConfigError("scale_mode must be sqrt_dk or d_model, got " + scale);
    }
    m.use_residual = s.optional<bool>("use_residual", m.use_residual);
    m.mask_enabled = s.optional<bool>("mask_enabled", m.mask_enabled);
    s.finish();
    return m;
}

PipelineConstants read_pipeline(Section& s) {
    PipelineConstants p;
    p.axi_cc = s.optional<int>("axi_cc", p.axi_cc);
    p.addr_cc = s.optional<int>("addr_cc", p.addr_cc);
    p.load_cc = s.optional<int>("load_cc", p.load_cc);
    p.store_cc = s.optional<int>("store_cc", p.store_cc);
    p.convert_cc = s.optional<int>("convert_cc", p.convert_cc);
    p.mult_cc = s.optional<int>("mult_cc", p.mult_cc);
    p.add_cc = s.optional<int>("add_cc", p.add_cc);
    p.pd_ba_cc = s.optional<int>("pd_ba_cc", p.pd_ba_cc);
    p.pd_ffn_extra_cc = s.optional<int>("pd_ffn_extra_cc", p.pd_ffn_extra_cc);
    p.ii = s.optional<int>("ii", p.ii);
    s.finish();
    return p;
}

ordered_json model_json(const ModelConfig& m) {
    ordered_json j;
    j["d_model"] = m.d_model;
    j["num_heads"] = m.num_heads;
    j["num_layers"] = m.num_layers;
    j["seq_len"] = m.seq_len;
    j["activation"] = to_string(m.activation);
    j["scale_mode"] = to_string(m.scale_mode);
    j["use_residual"] = m.use_residual;
    j["mask_enabled"] = m.mask_enabled;
    return j;
}

ordered_json pipeline_json(const PipelineConstants& p) {
    ordered_json j;
    j["axi_cc"] = p.axi_cc;
    j["addr_cc"] = p.addr_cc;
    j["load_cc"] = p.load_cc;
    j["store_cc"] = p.store_cc;
    j["convert_cc"] = p.convert_cc;
    j["mult_cc"] = p.mult_cc;
    j["add_cc"] = p.add_cc;
    j["pd_ba_cc"] = p.pd_ba_cc;
    j["pd_ffn_extra_cc"] = p.pd_ffn_extra_cc;
    j["ii"] = p.ii;
    return j;
}

}  // namespace

ParsedConfig parse_config(std::string_view text) {
    ordered_json root;
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        root = ordered_json::object();
    } else {
        try {
            root = ordered_json::parse(text.begin(), text.end());
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
        }
    }

    Section top(root, "<root>");
    ParsedConfig cfg;

    Section model(section_or_empty(root, "model"), "model");
    if (top.has("model")) top.raw("model");
    cfg.model = read_model(model, ModelConfig{});

    Section hw(section_or_empty(root, "hardware"), "hardware");
    if (top.has("hardware")) top.raw("hardware");
    auto& h = cfg.hardware;
    h.ts_mha = hw.required<int>("ts_mha");
    h.ts_ffn = hw.required<int>("ts_ffn");
    h.clock_mhz = hw.required<double>("clock_mhz");
    h.fx_format.width_bits = hw.optional<int>("width_bits", 8);
    h.fx_format.frac_bits = hw.optional<int>("frac_bits", 4);
    h.per_tile_requantize = hw.optional<bool>("per_tile_requantize", false);
    if (hw.has("max_model")) {
        Section mm(hw.raw("max_model"), "hardware.max_model");
        h.max_model = read_model(mm, cfg.model);
    } else {
        h.max_model = cfg.model;
    }
    if (hw.has("pipeline")) {
        Section p(hw.raw("pipeline"), "hardware.pipeline");
        h.pipeline = read_pipeline(p);
    }
    hw.finish();

    if (top.has("device")) {
        Section dev(top.raw("device"), "device");
        cfg.device.name = dev.required<std::string>("name");
        cfg.device.dsp_total = dev.required<std::int64_t>("dsp_total");
        cfg.device.lut_total = dev.required<std::int64_t>("lut_total");
        cfg.device.bram36_total = dev.required<std::int64_t>("bram36_total");
        dev.finish();
        if (cfg.device.dsp_total <= 0 || cfg.device.lut_total <= 0 || cfg.device.bram36_total <= 0) {
            throw ConfigError("device totals must be positive");
        }
    } else {
        cfg.device = u55c_profile();
    }
    top.finish();
    return cfg;
}

ParsedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const ParsedConfig& cfg) {
    ordered_json root;
    root["model"] = model_json(cfg.model);
    const auto& h = cfg.hardware;
    ordered_json hw;
    hw["ts_mha"] = h.ts_mha;
    hw["ts_ffn"] = h.ts_ffn;
    hw["clock_mhz"] = h.clock_mhz;
    hw["width_bits"] = h.fx_format.width_bits;
    hw["frac_bits"] = h.fx_format.frac_bits;
    hw["per_tile_requantize"] = h.per_tile_requantize;
    hw["max_model"] = model_json(h.max_model);
    hw["pipeline"] = pipeline_json(h.pipeline);
    root["hardware"] = hw;
    ordered_json dev;
    dev["name"] = cfg.device.name;
    dev["dsp_total"] = cfg.device.dsp_total;
    dev["lut_total"] = cfg.device.lut_total;
    dev["bram36_total"] = cfg.device.bram36_total;
    root["device"] = dev;
    return root.dump(2) + "\n";
}

ValidationResult validate(const ModelConfig& m, const HardwareConfig& hw) {
    ValidationResult r;
    auto fail = [&](std::string msg) { r.violations.push_back(std::move(msg)); };

    if (m.d_model < 1) fail("d_model must be >= 1");
    if (m.num_heads < 1) fail("num_heads must be >= 1");
    if (m.num_layers < 1) fail("num_layers must be >= 1");
    if (m.seq_len < 1) fail("seq_len must be >= 1");
    if (hw.ts_mha < 1) fail("ts_mha must be >= 1");
    if (hw.ts_ffn < 1) fail("ts_ffn must be >= 1");
    if (!(hw.clock_mhz > 0.0)) fail("clock_mhz must be > 0");
    if (!hw.fx_format.valid()) {
        fail("fixed-point format requires width_bits in {8,16} and 0 < frac_bits < width_bits");
    }

    if (m.d_model >= 1 && m.num_heads >= 1 && m.d_model % m.num_heads != 0) {
        fail("d_model not divisible by num_heads");
    }
    if (m.d_model >= 1 && hw.ts_mha >= 1) {
        if (hw.ts_mha > m.d_model) {
            fail("ts_mha exceeds d_model");
        } else if (m.d_model % hw.ts_mha != 0) {
            fail("d_model not divisible by ts_mha");
        }
    }
    if (m.d_model >= 1 && hw.ts_ffn >= 1) {
        if (hw.ts_ffn > m.d_model) {
            fail("ts_ffn exceeds d_model");
        } else if (m.d_model % hw.ts_ffn != 0) {
            fail("d_model not divisible by ts_ffn");
        }
    }

    auto check_max = [&](const char* name, int value, int max) {
        if (value > max) {
            fail(std::string(name) + " " + std::to_string(value) +
                 " exceeds synthesis-time maximum " + std::to_string(max));
        }
    };
    check_max("d_model", m.d_model, hw.max_model.d_model);
    check_max("num_heads", m.num_heads, hw.max_model.num_heads);
    check_max("num_layers", m.num_layers, hw.max_model.num_layers);
    check_max("seq_len", m.seq_len, hw.max_model.seq_len);

    const auto& p = hw.pipeline;
    for (int v : {p.axi_cc, p.addr_cc, p.load_cc, p.store_cc, p.convert_cc, p.mult_cc, p.add_cc,
                  p.pd_ba_cc, p.pd_ffn_extra_cc}) {
        if (v < 0) {
            fail("pipeline constants must be >= 0");
            break;
        }
    }
    if (p.ii < 1) fail("initiation interval must be >= 1");
    return r;
}

void require_valid(const ModelConfig& m, const HardwareConfig& hw) {
    auto r = validate(m, hw);
    if (!r.ok()) throw ConfigError("invalid configuration: " + r.joined());
}

DerivedDims derived_dims(const ModelConfig& m, const HardwareConfig& hw) {
    DerivedDims d;
    d.d_k = m.d_model / m.num_heads;
    d.tiles_mha = m.d_model / hw.ts_mha;
    d.tiles_ffn = m.d_model / hw.ts_ffn;
    d.ffn1_reuse = std::int64_t{d.tiles_ffn} * d.tiles_ffn;
    d.ffn23_reuse = 4 * d.ffn1_reuse;
    return d;
}

}  // namespace tesim
