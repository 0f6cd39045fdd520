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

#include "tesim/engines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tesim/parallel.hpp"

namespace tesim {

std::string_view to_string(EngineId e) {
    switch (e) {
        case EngineId::qkv: return "qkv";
        case EngineId::qk: return "qk";
        case EngineId::softmax: return "softmax";
        case EngineId::sv: return "sv";
        case EngineId::ffn1: return "ffn1";
        case EngineId::ffn2: return "ffn2";
        case EngineId::ffn3: return "ffn3";
        case EngineId::layernorm: return "layernorm";
    }
    return "?";
}

std::size_t ScheduleTrace::count(EngineId engine, int layer, int head) const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](const auto& e) {
        return e.engine == engine && (layer < 0 || e.layer == layer) && (head < 0 || e.head == head);
    }));
}

namespace {

using RawView = MatrixView<Raw>;
using CRawView = MatrixView<const Raw>;
using AccView = MatrixView<AccRaw>;

struct QkvBuffers {
    RawView x_tile;                   // SL x ts
    std::array<RawView, 3> w_tile;    // d_k x ts, transposed weight tile
    std::array<AccView, 3> acc;       // SL x d_k
    std::array<RawView, 3> out;       // SL x d_k
    std::array<std::span<Raw>, 3> bias;
};

struct FfnBuffers {
    RawView x_tile;  // SL x ts
    RawView w_tile;  // ts x ts
    AccView acc;     // SL x out_dim
    RawView out;     // SL x out_dim
};

template <class T>
void fill(MatrixView<T> v, T value) {
    for (std::size_t i = 0; i < v.rows(); ++i) {
        for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) = value;
    }
}

void check_format(const FxTensor& t, FixedFormat f, const char* what) {
    if (!(t.format == f)) {
        throw ShapeError(std::string(what) + " is in " + t.format.name() + ", expected " + f.name());
    }
}

// Algorithm "Q, K, V calculation": column tiles of X and row tiles of W are
// loaded into on-chip buffers; each tile contributes a partial dot product
// that is accumulated across tiles. Bias is added after the last tile.
void run_qkv(CRawView x, const HeadWeights<FxTensor>& w, int ts, bool per_tile, FixedFormat f,
             const QkvBuffers& buf, std::vector<TraceEntry>* trace, int layer, int head) {
    const std::size_t sl = x.rows();
    const std::size_t d = x.cols();
    const std::size_t dk = w.wq.cols();
    const auto tile = static_cast<std::size_t>(ts);
    if (d % tile != 0) throw ShapeError("qkv: d_model is not a multiple of ts_mha");
    const std::array<const FxTensor*, 3> mats{&w.wq, &w.wk, &w.wv};
    const std::array<const FxTensor*, 3> biases{&w.bq, &w.bk, &w.bv};
    for (int m = 0; m < 3; ++m) {
        if (mats[m]->rows() != d || mats[m]->cols() != dk || biases[m]->size() != dk) {
            throw ShapeError("qkv: head weights do not match d_model x d_k");
        }
        check_format(*mats[m], f, "qkv weight");
        check_format(*biases[m], f, "qkv bias");
    }

    for (int m = 0; m < 3; ++m) {
        if (per_tile) {
            fill(buf.out[m], Raw{0});
        } else {
            fill(buf.acc[m], AccRaw{0});
        }
    }

    const std::size_t tiles = d / tile;
    for (std::size_t t = 0; t < tiles; ++t) {
        const std::size_t c0 = t * tile;
        for (std::size_t s = 0; s < sl; ++s) {
            for (std::size_t j = 0; j < tile; ++j) buf.x_tile(s, j) = x(s, c0 + j);
        }
        for (int m = 0; m < 3; ++m) {
            for (std::size_t k = 0; k < dk; ++k) {
                for (std::size_t j = 0; j < tile; ++j) buf.w_tile[m](k, j) = mats[m]->at(c0 + j, k);
            }
        }
        for (std::size_t s = 0; s < sl; ++s) {
            for (std::size_t k = 0; k < dk; ++k) {
                std::array<AccRaw, 3> sum{0, 0, 0};
                for (std::size_t j = 0; j < tile; ++j) {
                    const AccRaw xv = buf.x_tile(s, j);
                    for (int m = 0; m < 3; ++m) sum[m] += xv * buf.w_tile[m](k, j);
                }
                for (int m = 0; m < 3; ++m) {
                    if (per_tile) {
                        buf.out[m](s, k) = saturating_add(
                            buf.out[m](s, k), saturate(round_shift(sum[m], f.frac_bits), f), f);
                    } else {
                        buf.acc[m](s, k) += sum[m];
                    }
                }
            }
        }
        if (trace) {
            trace->push_back(TraceEntry{EngineId::qkv, layer, head, static_cast<int>(t),
                                        static_cast<int>(t), 0,
                                        TripCounts{static_cast<int>(sl), static_cast<int>(dk), ts}});
        }
    }

    for (int m = 0; m < 3; ++m) {
        std::copy(biases[m]->raws.data.begin(), biases[m]->raws.data.end(), buf.bias[m].begin());
        for (std::size_t s = 0; s < sl; ++s) {
            for (std::size_t k = 0; k < dk; ++k) {
                const Raw b = buf.bias[m][k];
                if (per_tile) {
                    buf.out[m](s, k) = saturating_add(buf.out[m](s, k), b, f);
                } else {
                    buf.out[m](s, k) =
                        saturate(round_shift(buf.acc[m](s, k) + widen(b, f), f.frac_bits), f);
                }
            }
        }
    }
}

void run_qk(CRawView q, CRawView k, double divisor, FixedFormat f, RawView out) {
    if (q.cols() != k.cols() || q.rows() != k.rows()) throw ShapeError("qk: Q and K differ in shape");
    for (std::size_t i = 0; i < q.rows(); ++i) {
        for (std::size_t j = 0; j < k.rows(); ++j) {
            AccRaw s = 0;
            for (std::size_t c = 0; c < q.cols(); ++c) s += static_cast<AccRaw>(q(i, c)) * k(j, c);
            out(i, j) = requantize_scaled(s, f, divisor);
        }
    }
}

void run_softmax(RawView s, KeyMask mask, FixedFormat f) {
    const std::size_t n = s.cols();
    if (!mask.empty() && mask.size() != n) throw ShapeError("softmax: mask length differs from SL");
    if (!mask.empty() && std::none_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v; })) {
        throw ShapeError("softmax: key mask removes every position");
    }
    std::vector<double> row(n);
    for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = (!mask.empty() && mask[j] == 0) ? -std::numeric_limits<double>::infinity()
                                                     : dequantize(s(i, j), f);
        }
        const auto p = ref_softmax(row);
        for (std::size_t j = 0; j < n; ++j) s(i, j) = quantize(p[j], f).raw;
    }
}

void run_sv(CRawView p, CRawView v, FixedFormat f, RawView out) {
    if (p.cols() != v.rows()) throw ShapeError("sv: S columns differ from V rows");
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < v.cols(); ++j) {
            AccRaw s = 0;
            for (std::size_t k = 0; k < p.cols(); ++k) s += static_cast<AccRaw>(p(i, k)) * v(k, j);
            out(i, j) = saturate(round_shift(s, f.frac_bits), f);
        }
    }
}

EngineId engine_of(FfnKind kind) {
    switch (kind) {
        case FfnKind::ffn1: return EngineId::ffn1;
        case FfnKind::ffn2: return EngineId::ffn2;
        case FfnKind::ffn3: return EngineId::ffn3;
    }
    return EngineId::ffn1;
}

// FFN engine: the weight matrix is split into ts x ts blocks. For each
// output-column block the input-dimension blocks are visited in order, each
// block invocation adding its partial sums into the running accumulators.
void run_ffn(FfnKind kind, CRawView x, const FxTensor& w, const FxTensor& b, int ts, bool per_tile,
             FixedFormat f, Activation act, const FfnBuffers& buf, std::vector<TraceEntry>* trace,
             int layer) {
    const std::size_t sl = x.rows();
    const std::size_t in_dim = x.cols();
    const std::size_t out_dim = w.cols();
    const auto tile = static_cast<std::size_t>(ts);
    if (w.rows() != in_dim || b.size() != out_dim) {
        throw ShapeError("ffn: weight " + dims_to_string(w.dims()) + " / bias " +
                         dims_to_string(b.dims()) + " do not match input width " +
                         std::to_string(in_dim));
    }
    if (in_dim % tile != 0 || out_dim % tile != 0) {
        throw ShapeError("ffn: matrix dims are not multiples of ts_ffn");
    }
    check_format(w, f, "ffn weight");
    check_format(b, f, "ffn bias");

    if (per_tile) {
        fill(buf.out, Raw{0});
    } else {
        fill(buf.acc, AccRaw{0});
    }

    const std::size_t in_tiles = in_dim / tile;
    const std::size_t out_tiles = out_dim / tile;
    int invocation = 0;
    for (std::size_t ot = 0; ot < out_tiles; ++ot) {
        for (std::size_t it = 0; it < in_tiles; ++it) {
            for (std::size_t s = 0; s < sl; ++s) {
                for (std::size_t k = 0; k < tile; ++k) buf.x_tile(s, k) = x(s, it * tile + k);
            }
            for (std::size_t k = 0; k < tile; ++k) {
                for (std::size_t j = 0; j < tile; ++j) {
                    buf.w_tile(k, j) = w.at(it * tile + k, ot * tile + j);
                }
            }
            for (std::size_t s = 0; s < sl; ++s) {
                for (std::size_t j = 0; j < tile; ++j) {
                    AccRaw sum = 0;
                    for (std::size_t k = 0; k < tile; ++k) {
                        sum += static_cast<AccRaw>(buf.x_tile(s, k)) * buf.w_tile(k, j);
                    }
                    const std::size_t col = ot * tile + j;
                    if (per_tile) {
                        buf.out(s, col) = saturating_add(
                            buf.out(s, col), saturate(round_shift(sum, f.frac_bits), f), f);
                    } else {
                        buf.acc(s, col) += sum;
                    }
                }
            }
            if (trace) {
                trace->push_back(TraceEntry{engine_of(kind), layer, -1, invocation,
                                            static_cast<int>(it), static_cast<int>(ot),
                                            TripCounts{static_cast<int>(sl), ts, ts}});
            }
            ++invocation;
        }
    }

    for (std::size_t s = 0; s < sl; ++s) {
        for (std::size_t j = 0; j < out_dim; ++j) {
            const Raw bias = b.raws.data[j];
            Raw y = per_tile ? saturating_add(buf.out(s, j), bias, f)
                             : saturate(round_shift(buf.acc(s, j) + widen(bias, f), f.frac_bits), f);
            if (kind == FfnKind::ffn2) {
                y = act == Activation::relu ? std::max(y, Raw{0})
                                            : quantize(gelu(dequantize(y, f)), f).raw;
            }
            buf.out(s, j) = y;
        }
    }
}

void run_layernorm(CRawView in, const FxTensor& gamma, const FxTensor& beta, FixedFormat f,
                   RawView out) {
    std::vector<Raw> row(in.cols());
    for (std::size_t i = 0; i < in.rows(); ++i) {
        for (std::size_t j = 0; j < in.cols(); ++j) row[j] = in(i, j);
        const auto y = layernorm_fx(row, gamma.raws.data, beta.raws.data, f);
        for (std::size_t j = 0; j < in.cols(); ++j) out(i, j) = y[j];
    }
}

void add_residual(RawView y, CRawView residual, FixedFormat f) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
        for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) = saturating_add(y(i, j), residual(i, j), f);
    }
}

template <class T>
MatrixView<T> make_view(std::vector<T>& buf, std::size_t offset, std::size_t rows, std::size_t cols,
                        std::size_t stride) {
    return MatrixView<T>(std::span<T>(buf).subspan(offset), rows, cols, stride);
}

std::size_t ffn_dims_out(FfnKind kind, std::size_t d) {
    return kind == FfnKind::ffn2 ? 4 * d : d;
}

}  // namespace

QkvOutput qkv_ce(const FxTensor& x, const HeadWeights<FxTensor>& w, const HardwareConfig& hw,
                 ScheduleTrace* trace) {
    const FixedFormat f = hw.fx_format;
    check_format(x, f, "qkv input");
    if (x.dims().size() != 2) throw ShapeError("qkv input must be rank 2");
    const std::size_t sl = x.rows();
    const std::size_t dk = w.wq.cols();
    const auto ts = static_cast<std::size_t>(hw.ts_mha);
    if (ts == 0 || x.cols() % ts != 0) throw ShapeError("qkv: d_model is not a multiple of ts_mha");

    std::vector<Raw> x_tile(sl * ts);
    std::array<std::vector<Raw>, 3> w_tile;
    std::array<std::vector<AccRaw>, 3> acc;
    std::array<std::vector<Raw>, 3> bias;
    QkvOutput out{FxTensor(Dims{sl, dk}, f), FxTensor(Dims{sl, dk}, f), FxTensor(Dims{sl, dk}, f)};
    std::array<FxTensor*, 3> outs{&out.q, &out.k, &out.v};
    QkvBuffers buf;
    buf.x_tile = make_view(x_tile, 0, sl, ts, ts);
    for (int m = 0; m < 3; ++m) {
        w_tile[m].resize(dk * ts);
        acc[m].resize(sl * dk);
        bias[m].resize(dk);
        buf.w_tile[m] = make_view(w_tile[m], 0, dk, ts, ts);
        buf.acc[m] = make_view(acc[m], 0, sl, dk, dk);
        buf.out[m] = view(outs[m]->raws);
        buf.bias[m] = bias[m];
    }
    std::vector<TraceEntry> entries;
    run_qkv(view(x.raws), w, hw.ts_mha, hw.per_tile_requantize, f, buf, trace ? &entries : nullptr,
            0, 0);
    if (trace) trace->entries.insert(trace->entries.end(), entries.begin(), entries.end());
    return out;
}

FxTensor qk_ce(const FxTensor& q, const FxTensor& k, ScaleMode mode, int d_model) {
    if (!(q.format == k.format)) throw ShapeError("qk: Q and K formats differ");
    FxTensor s(Dims{q.rows(), k.rows()}, q.format);
    const double divisor = mode == ScaleMode::sqrt_dk ? std::sqrt(static_cast<double>(q.cols()))
                                                      : static_cast<double>(d_model);
    run_qk(view(q.raws), view(k.raws), divisor, q.format, view(s.raws));
    return s;
}

FxTensor softmax_fx(const FxTensor& scores, KeyMask mask) {
    if (scores.dims().size() != 2 || scores.rows() != scores.cols()) {
        throw ShapeError("softmax: score matrix must be square");
    }
    FxTensor p = scores;
    run_softmax(view(p.raws), mask, p.format);
    return p;
}

FxTensor sv_ce(const FxTensor& s, const FxTensor& v) {
    if (!(s.format == v.format)) throw ShapeError("sv: S and V formats differ");
    FxTensor out(Dims{s.rows(), v.cols()}, v.format);
    run_sv(view(s.raws), view(v.raws), v.format, view(out.raws));
    return out;
}

FxTensor ffn_ce(FfnKind kind, const FxTensor& x, const FxTensor& w, const FxTensor& b,
                const HardwareConfig& hw, Activation act, ScheduleTrace* trace) {
    const FixedFormat f = hw.fx_format;
    check_format(x, f, "ffn input");
    const std::size_t sl = x.rows();
    const auto ts = static_cast<std::size_t>(hw.ts_ffn);
    const std::size_t out_dim = w.cols();
    if (ts == 0) throw ShapeError("ffn: ts_ffn must be positive");
    std::vector<Raw> x_tile(sl * ts);
    std::vector<Raw> w_tile(ts * ts);
    std::vector<AccRaw> acc(sl * out_dim);
    FxTensor out(Dims{sl, out_dim}, f);
    FfnBuffers buf{make_view(x_tile, 0, sl, ts, ts), make_view(w_tile, 0, ts, ts, ts),
                   make_view(acc, 0, sl, out_dim, out_dim), view(out.raws)};
    std::vector<TraceEntry> entries;
    run_ffn(kind, view(x.raws), w, b, hw.ts_ffn, hw.per_tile_requantize, f, act, buf,
            trace ? &entries : nullptr, 0);
    if (trace) trace->entries.insert(trace->entries.end(), entries.begin(), entries.end());
    return out;
}

std::vector<Raw> layernorm_fx(std::span<const Raw> row, std::span<const Raw> gamma,
                              std::span<const Raw> beta, FixedFormat f) {
    if (row.size() != gamma.size() || row.size() != beta.size()) {
        throw ShapeError("layernorm: row, gamma and beta lengths differ");
    }
    auto deq = [f](std::span<const Raw> v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = dequantize(v[i], f);
        return out;
    };
    const auto y = ref_layernorm(deq(row), deq(gamma), deq(beta));
    std::vector<Raw> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = quantize(y[i], f).raw;
    return out;
}

Engine::Engine(const HardwareConfig& hw) : Engine(hw, hw.max_model) {}

Engine::Engine(const HardwareConfig& hw, const ModelConfig& active) : hw_(hw) {
    require_valid(hw.max_model, hw);
    require_valid(active, hw);
    active_ = active;
    allocate();
}

void Engine::allocate() {
    sl_max_ = static_cast<std::size_t>(hw_.max_model.seq_len);
    d_max_ = static_cast<std::size_t>(hw_.max_model.d_model);
    h_max_ = static_cast<std::size_t>(hw_.max_model.num_heads);
    const auto ts = static_cast<std::size_t>(hw_.ts_mha);
    const auto tf = static_cast<std::size_t>(hw_.ts_ffn);

    layer_in_.assign(sl_max_ * d_max_, 0);
    x_tile_.assign(h_max_ * sl_max_ * ts, 0);
    for (int m = 0; m < 3; ++m) {
        w_tile_[m].assign(d_max_ * ts, 0);
        qkv_acc_[m].assign(sl_max_ * d_max_, 0);
        qkv_[m].assign(sl_max_ * d_max_, 0);
        bias_reg_[m].assign(d_max_, 0);
    }
    score_.assign(h_max_ * sl_max_ * sl_max_, 0);
    attn_.assign(sl_max_ * d_max_, 0);
    ffn_x_tile_.assign(sl_max_ * tf, 0);
    ffn_w_tile_.assign(tf * 4 * tf, 0);
    ffn_acc_.assign(sl_max_ * 4 * d_max_, 0);
    sub1_.assign(sl_max_ * d_max_, 0);
    ln1_.assign(sl_max_ * d_max_, 0);
    hidden_.assign(sl_max_ * 4 * d_max_, 0);
    sub2_.assign(sl_max_ * d_max_, 0);
}

void Engine::reconfigure(const ModelConfig& m) {
    require_valid(m, hw_);
    active_ = m;
}

std::vector<Engine::BufferInfo> Engine::buffer_inventory() const {
    std::vector<BufferInfo> out;
    auto add = [&](std::string_view name, const auto& v) {
        out.push_back(BufferInfo{name, static_cast<const void*>(v.data()), v.capacity()});
    };
    add("layer_in", layer_in_);
    add("x_tile", x_tile_);
    for (int m = 0; m < 3; ++m) {
        add("w_tile", w_tile_[m]);
        add("qkv_acc", qkv_acc_[m]);
        add("qkv", qkv_[m]);
        add("bias_reg", bias_reg_[m]);
    }
    add("score", score_);
    add("attn", attn_);
    add("ffn_x_tile", ffn_x_tile_);
    add("ffn_w_tile", ffn_w_tile_);
    add("ffn_acc", ffn_acc_);
    add("sub1", sub1_);
    add("ln1", ln1_);
    add("hidden", hidden_);
    add("sub2", sub2_);
    return out;
}

void Engine::run_head(const FxWeights& w, std::size_t layer, std::size_t head, KeyMask mask,
                      std::vector<TraceEntry>& trace) {
    const FixedFormat f = hw_.fx_format;
    const auto sl = static_cast<std::size_t>(active_.seq_len);
    const auto d = static_cast<std::size_t>(active_.d_model);
    const auto dk = static_cast<std::size_t>(active_.d_k());
    const auto ts = static_cast<std::size_t>(hw_.ts_mha);
    const int l = static_cast<int>(layer);
    const int h = static_cast<int>(head);

    QkvBuffers buf;
    buf.x_tile = make_view(x_tile_, head * sl_max_ * ts, sl, ts, ts);
    for (int m = 0; m < 3; ++m) {
        buf.w_tile[m] = make_view(w_tile_[m], head * dk * ts, dk, ts, ts);
        buf.acc[m] = make_view(qkv_acc_[m], head * dk, sl, dk, d_max_);
        buf.out[m] = make_view(qkv_[m], head * dk, sl, dk, d_max_);
        buf.bias[m] = std::span<Raw>(bias_reg_[m]).subspan(head * dk, dk);
    }
    const CRawView x = make_view(layer_in_, 0, sl, d, d_max_);
    run_qkv(x, w.layers[layer].heads[head], hw_.ts_mha, hw_.per_tile_requantize, f, buf, &trace, l, h);

    const RawView score = make_view(score_, head * sl_max_ * sl_max_, sl, sl, sl_max_);
    run_qk(buf.out[0], buf.out[1], score_divisor(active_), f, score);
    trace.push_back(TraceEntry{EngineId::qk, l, h, 0, 0, 0,
                               TripCounts{static_cast<int>(sl), static_cast<int>(sl),
                                          static_cast<int>(dk)}});

    run_softmax(score, active_.mask_enabled ? mask : KeyMask{}, f);
    trace.push_back(TraceEntry{EngineId::softmax, l, h, 0, 0, 0,
                               TripCounts{static_cast<int>(sl), static_cast<int>(sl), 1}});

    run_sv(score, buf.out[2], f, make_view(attn_, head * dk, sl, dk, d_max_));
    trace.push_back(TraceEntry{EngineId::sv, l, h, 0, 0, 0,
                               TripCounts{static_cast<int>(sl), static_cast<int>(dk),
                                          static_cast<int>(sl)}});
}

ForwardResult Engine::forward(const FxTensor& x, const FxWeights& w, KeyMask mask) {
    const FixedFormat f = hw_.fx_format;
    const auto sl = static_cast<std::size_t>(active_.seq_len);
    const auto d = static_cast<std::size_t>(active_.d_model);
    const auto heads = static_cast<std::size_t>(active_.num_heads);
    check_format(x, f, "encoder input");
    if (x.dims() != Dims{sl, d}) {
        throw ShapeError("encoder input must be " + dims_to_string(Dims{sl, d}) + ", got " +
                         dims_to_string(x.dims()));
    }
    check_shapes(w, active_, f);
    if (active_.mask_enabled && !mask.empty() && mask.size() != sl) {
        throw ShapeError("key mask length does not match seq_len");
    }

    ForwardResult result;
    const RawView cur = make_view(layer_in_, 0, sl, d, d_max_);
    for (std::size_t i = 0; i < sl; ++i) {
        for (std::size_t j = 0; j < d; ++j) cur(i, j) = x.at(i, j);
    }

    const auto tf = static_cast<std::size_t>(hw_.ts_ffn);
    auto ffn_buffers = [&](FfnKind kind, std::vector<Raw>& out) {
        const std::size_t out_dim = ffn_dims_out(kind, d);
        const std::size_t stride = kind == FfnKind::ffn2 ? 4 * d_max_ : d_max_;
        return FfnBuffers{make_view(ffn_x_tile_, 0, sl, tf, tf), make_view(ffn_w_tile_, 0, tf, tf, tf),
                          make_view(ffn_acc_, 0, sl, out_dim, 4 * d_max_),
                          make_view(out, 0, sl, out_dim, stride)};
    };

    for (std::size_t layer = 0; layer < w.layers.size(); ++layer) {
        const auto& lw = w.layers[layer];
        const int l = static_cast<int>(layer);

        std::vector<std::vector<TraceEntry>> head_traces(heads);
        parallel_for(heads, threads_, [&](std::size_t h) { run_head(w, layer, h, mask, head_traces[h]); });
        for (auto& ht : head_traces) {
            result.trace.entries.insert(result.trace.entries.end(), ht.begin(), ht.end());
        }

        const CRawView attn = make_view(attn_, 0, sl, d, d_max_);
        const auto b1 = ffn_buffers(FfnKind::ffn1, sub1_);
        run_ffn(FfnKind::ffn1, attn, lw.wo, lw.bo, hw_.ts_ffn, hw_.per_tile_requantize, f,
                active_.activation, b1, &result.trace.entries, l);
        if (active_.use_residual) add_residual(b1.out, cur, f);
        const RawView ln1 = make_view(ln1_, 0, sl, d, d_max_);
        run_layernorm(b1.out, lw.ln1_gamma, lw.ln1_beta, f, ln1);
        result.trace.entries.push_back(TraceEntry{EngineId::layernorm, l, -1, 0, 0, 0,
                                                  TripCounts{static_cast<int>(sl), static_cast<int>(d), 1}});

        const auto b2 = ffn_buffers(FfnKind::ffn2, hidden_);
        run_ffn(FfnKind::ffn2, ln1, lw.w1, lw.b1, hw_.ts_ffn, hw_.per_tile_requantize, f,
                active_.activation, b2, &result.trace.entries, l);

        const auto b3 = ffn_buffers(FfnKind::ffn3, sub2_);
        run_ffn(FfnKind::ffn3, b2.out, lw.w2, lw.b2, hw_.ts_ffn, hw_.per_tile_requantize, f,
                active_.activation, b3, &result.trace.entries, l);
        if (active_.use_residual) add_residual(b3.out, ln1, f);
        run_layernorm(b3.out, lw.ln2_gamma, lw.ln2_beta, f, cur);
        result.trace.entries.push_back(TraceEntry{EngineId::layernorm, l, -1, 1, 0, 0,
                                                  TripCounts{static_cast<int>(sl), static_cast<int>(d), 1}});
    }

    result.output = FxTensor(Dims{sl, d}, f);
    for (std::size_t i = 0; i < sl; ++i) {
        for (std::size_t j = 0; j < d; ++j) result.output.at(i, j) = cur(i, j);
    }
    return result;
}

ForwardResult encoder_forward_tiled(const FxTensor& x, const FxWeights& w, const ModelConfig& m,
                                    const HardwareConfig& hw, KeyMask mask, int threads) {
    HardwareConfig fitted = hw;
    // A standalone call only needs buffers for m itself.
    fitted.max_model = m;
    Engine engine(fitted, m);
    engine.set_threads(threads);
    return engine.forward(x, w, mask);
}

}  // namespace tesim
