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

#include "tesim/commands.hpp"

#include <cmath>
#include <sstream>

#include "tesim/dse.hpp"
#include "tesim/engines.hpp"
#include "tesim/reference.hpp"
#include "tesim/rng.hpp"
#include "tesim/tensor_io.hpp"
#include "tesim/untiled_oracle.hpp"

namespace tesim {

namespace {

struct ErrorStats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

ErrorStats error_vs_reference(const FxTensor& got, const RealTensor& want) {
    ErrorStats s;
    for (std::size_t i = 0; i < want.data.size(); ++i) {
        const double e = std::abs(dequantize(got.raws.data[i], got.format) - want.data[i]);
        s.max_abs = std::max(s.max_abs, e);
        s.mean_abs += e;
    }
    if (!want.data.empty()) s.mean_abs /= static_cast<double>(want.data.size());
    return s;
}

Json error_json(const ErrorStats& s) {
    return Json{{"max_abs_error", s.max_abs}, {"mean_abs_error", s.mean_abs}};
}

std::string index_string(std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

/// First differing element of two equally shaped tensors, as "stage (i, j): a vs b".
std::optional<std::string> first_mismatch(const std::string& stage, const FxTensor& a, const FxTensor& b) {
    if (a.dims() != b.dims()) return stage + ": shape " + dims_to_string(a.dims()) + " vs " + dims_to_string(b.dims());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (a.at(i, j) != b.at(i, j)) {
                return stage + " " + index_string(i, j) + ": tiled " + std::to_string(a.at(i, j)) +
                       " vs untiled " + std::to_string(b.at(i, j));
            }
        }
    }
    return std::nullopt;
}

struct BoundCheck {
    double max_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::optional<std::string> violation;
};

// Compares a per-tile requantized projection against the exact real-valued
// affine result. Elements whose running tile sums come within the error
// budget of the representable range are skipped, since saturation there is
// not rounding error.
void check_tile_bound(const std::string& stage, const FxTensor& x, const FxTensor& w, const FxTensor& b,
                      const FxTensor& got, int ts, BoundCheck& out) {
    const FixedFormat f = got.format;
    const std::size_t tiles = x.cols() / static_cast<std::size_t>(ts);
    const double lsb = f.lsb();
    const double budget = static_cast<double>(tiles) * lsb / 2.0;
    const double acc_lsb = lsb * lsb;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            AccRaw running = 0;
            bool near_edge = false;
            for (std::size_t t = 0; t < tiles; ++t) {
                for (std::size_t k = t * ts; k < (t + 1) * ts; ++k) {
                    running += AccRaw{x.at(i, k)} * AccRaw{w.at(k, j)};
                }
                const double v = static_cast<double>(running) * acc_lsb;
                if (v - budget < f.min_value() || v + budget > f.max_value()) near_edge = true;
            }
            const double exact = static_cast<double>(running) * acc_lsb + dequantize(b.raws.data[j], f);
            if (exact - budget < f.min_value() || exact + budget > f.max_value()) near_edge = true;
            if (near_edge) {
                ++out.skipped;
                continue;
            }
            ++out.checked;
            const double e = std::abs(dequantize(got.at(i, j), f) - exact);
            out.max_error = std::max(out.max_error, e);
            if (e > budget && !out.violation) {
                out.violation = stage + " " + index_string(i, j) + ": error " + std::to_string(e) +
                                " exceeds bound " + std::to_string(budget);
            }
        }
    }
}

Json latency_pair(const ModelConfig& m, const HardwareConfig& hw, std::vector<LatencyReport>& rows) {
    rows = {encoder_latency(m, hw, AccountingMode::paper_literal),
            encoder_latency(m, hw, AccountingMode::per_tile)};
    return Json{{"paper_literal", latency_to_json(rows[0])}, {"per_tile", latency_to_json(rows[1])}};
}

}  // namespace

CommandResult run_verify(const ParsedConfig& cfg_in, std::uint64_t seed, const SizeOverrides& sz, int threads,
                         bool inject_fault) {
    ParsedConfig cfg = cfg_in;
    auto& m = cfg.model;
    auto& hw = cfg.hardware;
    const bool resized = sz.d_model || sz.num_heads || sz.num_layers || sz.seq_len;
    if (sz.d_model) m.d_model = *sz.d_model;
    if (sz.num_heads) m.num_heads = *sz.num_heads;
    if (sz.num_layers) m.num_layers = *sz.num_layers;
    if (sz.seq_len) m.seq_len = *sz.seq_len;
    if (sz.ts_mha) hw.ts_mha = *sz.ts_mha;
    if (sz.ts_ffn) hw.ts_ffn = *sz.ts_ffn;
    if (sz.per_tile_requantize) hw.per_tile_requantize = *sz.per_tile_requantize;
    if (resized) hw.max_model = m;
    require_valid(m, hw);

    const FixedFormat f = hw.fx_format;
    const FxWeights w = generate_weights(seed, m, f);
    const FxTensor x = generate_input(seed, m, f);
    std::vector<std::string> violations;

    HardwareConfig wide = hw;
    wide.per_tile_requantize = false;
    HardwareConfig narrow = hw;
    narrow.per_tile_requantize = true;

    // Layer-0 projections, stage by stage.
    BoundCheck bound;
    double softmax_max_residual = 0.0;
    const double softmax_limit = static_cast<double>(m.seq_len) * f.lsb();
    const auto& layer0 = w.layers.front();
    for (std::size_t h = 0; h < layer0.heads.size(); ++h) {
        const auto& hwts = layer0.heads[h];
        const auto tiled = qkv_ce(x, hwts, wide, nullptr);
        const std::string head = "layer 0 head " + std::to_string(h);
        const std::pair<const FxTensor*, const FxTensor*> proj[3] = {
            {&hwts.wq, &hwts.bq}, {&hwts.wk, &hwts.bk}, {&hwts.wv, &hwts.bv}};
        const FxTensor* outs[3] = {&tiled.q, &tiled.k, &tiled.v};
        const char* names[3] = {"q", "k", "v"};
        for (int p = 0; p < 3; ++p) {
            const auto untiled = oracle::affine(x, *proj[p].first, *proj[p].second);
            if (auto mm = first_mismatch(head + " " + names[p], *outs[p], untiled)) violations.push_back(*mm);
        }
        if (hw.per_tile_requantize) {
            const auto per_tile = qkv_ce(x, hwts, narrow, nullptr);
            const FxTensor* pt[3] = {&per_tile.q, &per_tile.k, &per_tile.v};
            for (int p = 0; p < 3; ++p) {
                check_tile_bound(head + " " + names[p] + " per-tile", x, *proj[p].first, *proj[p].second,
                                 *pt[p], hw.ts_mha, bound);
            }
        }
        const auto probs = softmax_fx(qk_ce(tiled.q, tiled.k, m.scale_mode, m.d_model));
        for (std::size_t i = 0; i < probs.rows(); ++i) {
            AccRaw sum = 0;
            for (std::size_t j = 0; j < probs.cols(); ++j) sum += probs.at(i, j);
            const double residual = std::abs(static_cast<double>(sum) * f.lsb() - 1.0);
            softmax_max_residual = std::max(softmax_max_residual, residual);
            if (residual > softmax_limit) {
                violations.push_back(head + " softmax row " + std::to_string(i) + ": sum residual " +
                                     std::to_string(residual) + " exceeds " + std::to_string(softmax_limit));
            }
        }
    }
    if (bound.violation) violations.push_back(*bound.violation);

    auto tiled_out = encoder_forward_tiled(x, w, m, wide, {}, threads).output;
    if (inject_fault) tiled_out.raws.data.front() ^= 1;
    const auto untiled_out = oracle::encoder_forward(x, w, m);
    const auto out_mismatch = first_mismatch("encoder output", tiled_out, untiled_out);
    if (out_mismatch) violations.push_back(*out_mismatch);

    const auto ref = ref_encoder_forward(dequantize_tensor(x), dequantize_weights(w), m);
    const auto err = error_vs_reference(tiled_out, ref);

    CommandResult r;
    r.report["command"] = "verify";
    r.report["tool_version"] = kToolVersion;
    r.report["seed"] = seed;
    r.report["config"] = config_to_json(cfg);
    r.report["tiled_equals_untiled"] = out_mismatch ? "mismatch" : "exact";
    if (hw.per_tile_requantize) {
        const double budget = static_cast<double>(m.d_model / hw.ts_mha) * f.lsb() / 2.0;
        r.report["per_tile_bound"] = {{"bound", budget},
                                      {"max_error", bound.max_error},
                                      {"checked", bound.checked},
                                      {"skipped_near_saturation", bound.skipped},
                                      {"ok", !bound.violation.has_value()}};
        const auto pt_out = encoder_forward_tiled(x, w, m, narrow, {}, threads).output;
        r.report["per_tile_vs_reference"] = error_json(error_vs_reference(pt_out, ref));
    }
    r.report["vs_reference"] = error_json(err);
    r.report["softmax_row_sum"] = {{"max_residual", softmax_max_residual}, {"limit", softmax_limit}};
    r.report["violations"] = violations;
    r.report["ok"] = violations.empty();
    r.exit_code = violations.empty() ? kExitOk : kExitInvariantViolation;

    std::ostringstream text;
    text << "tiled==untiled: " << (out_mismatch ? "mismatch" : "exact") << '\n';
    if (hw.per_tile_requantize) {
        text << "per-tile bound: max error " << bound.max_error << " <= "
             << r.report["per_tile_bound"]["bound"].get<double>() << (bound.violation ? " FAILED" : " ok")
             << " (" << bound.checked << " checked, " << bound.skipped << " near saturation)\n";
    }
    text << "max abs error vs float reference: " << err.max_abs << '\n';
    text << "softmax row-sum residual: " << softmax_max_residual << " (limit " << softmax_limit << ")\n";
    for (const auto& v : violations) text << "VIOLATION " << v << '\n';
    r.text = text.str();
    return r;
}

CommandResult run_simulate(const ParsedConfig& cfg, const SimulateOptions& opts, int threads) {
    const auto& m = cfg.model;
    const auto& hw = cfg.hardware;
    require_valid(m, hw);
    const FixedFormat f = hw.fx_format;
    if ((!opts.weights_path || !opts.input_path) && !opts.seed) {
        throw ConfigError("simulate needs --seed unless both --weights and --input are given");
    }
    const FxWeights w = opts.weights_path ? load_weights(*opts.weights_path, m, f) : generate_weights(*opts.seed, m, f);
    const FxTensor x = opts.input_path ? load_tensor(*opts.input_path) : generate_input(*opts.seed, m, f);
    const Dims want{static_cast<std::size_t>(m.seq_len), static_cast<std::size_t>(m.d_model)};
    if (x.dims() != want) {
        throw ShapeError("input: expected " + dims_to_string(want) + ", got " + dims_to_string(x.dims()));
    }
    if (x.format != f) throw ShapeError("input: expected " + f.name() + ", got " + x.format.name());

    Engine engine(hw, m);
    engine.set_threads(threads);
    const auto out = engine.forward(x, w).output;
    save_tensor(opts.out_path, out);

    const auto ref = ref_encoder_forward(dequantize_tensor(x), dequantize_weights(w), m);
    const auto err = error_vs_reference(out, ref);

    std::vector<LatencyReport> rows;
    CommandResult r;
    r.report["command"] = "simulate";
    r.report["tool_version"] = kToolVersion;
    r.report["seed"] = opts.seed ? Json(*opts.seed) : Json(nullptr);
    r.report["weights_source"] = opts.weights_path ? "file" : "seed";
    r.report["input_source"] = opts.input_path ? "file" : "seed";
    r.report["config"] = config_to_json(cfg);
    r.report["output"] = {{"dims", out.dims()}, {"format", f.name()}, {"digest", tensor_digest(out)}};
    r.report["vs_reference"] = error_json(err);
    r.report["latency"] = latency_pair(m, hw, rows);
    const auto res = estimate_resources(m, hw, cfg.device);
    r.report["resources"] = resources_to_json(res, cfg.device);

    std::ostringstream text;
    text << summary_table(m, f, rows) << '\n'
         << "output digest " << tensor_digest(out) << ", max abs error vs float reference " << err.max_abs
         << "\n\n"
         << resource_table(res, cfg.device);
    r.text = text.str();
    return r;
}

CommandResult run_estimate(const ParsedConfig& cfg) {
    const auto& m = cfg.model;
    const auto& hw = cfg.hardware;
    require_valid(m, hw);
    std::vector<LatencyReport> rows;
    CommandResult r;
    r.report["command"] = "estimate";
    r.report["tool_version"] = kToolVersion;
    r.report["config"] = config_to_json(cfg);
    r.report["latency"] = latency_pair(m, hw, rows);
    const auto res = estimate_resources(m, hw, cfg.device);
    r.report["resources"] = resources_to_json(res, cfg.device);

    std::ostringstream text;
    text << summary_table(m, hw.fx_format, rows) << '\n';
    for (const auto& lr : rows) text << to_string(lr.mode) << " stages\n" << stage_table(lr) << '\n';
    text << resource_table(res, cfg.device);
    r.text = text.str();
    return r;
}

CommandResult run_dse(const ParsedConfig& cfg, const SweepSpec& spec, int threads) {
    const auto points = sweep(cfg.model, cfg.hardware, spec, cfg.device, threads);
    const auto best = select_best(points, spec.objective, spec.latency_tolerance);

    CommandResult r;
    r.report["command"] = "dse";
    r.report["tool_version"] = kToolVersion;
    r.report["config"] = config_to_json(cfg);
    r.report["objective"] = std::string(to_string(spec.objective));
    r.report["accounting_mode"] = std::string(to_string(spec.accounting_mode));
    Json pts = Json::array();
    for (const auto& p : points) pts.push_back(dse_point_to_json(p));
    r.report["points"] = pts;
    r.report["selection"] = best ? dse_point_to_json(*best) : Json(nullptr);
    r.report["status"] = best ? "ok" : "infeasible sweep";
    r.exit_code = best ? kExitOk : kExitInfeasible;

    r.text = dse_table(points, best) + (best ? "" : "infeasible sweep: no candidate fits the device budget\n");
    return r;
}

}  // namespace tesim
