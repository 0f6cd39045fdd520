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

#include "tesim/weights.hpp"

namespace tesim {

namespace {

template <class T, class Make>
EncoderWeights<T> make_weights(const ModelConfig& m, Make make) {
    const auto d = static_cast<std::size_t>(m.d_model);
    const auto dk = static_cast<std::size_t>(m.d_k());
    EncoderWeights<T> w;
    w.layers.resize(static_cast<std::size_t>(std::max(m.num_layers, 0)));
    for (auto& layer : w.layers) {
        layer.heads.resize(static_cast<std::size_t>(m.num_heads));
        for (auto& h : layer.heads) {
            h.wq = make(Dims{d, dk});
            h.wk = make(Dims{d, dk});
            h.wv = make(Dims{d, dk});
            h.bq = make(Dims{dk});
            h.bk = make(Dims{dk});
            h.bv = make(Dims{dk});
        }
        layer.wo = make(Dims{d, d});
        layer.bo = make(Dims{d});
        layer.w1 = make(Dims{d, 4 * d});
        layer.b1 = make(Dims{4 * d});
        layer.w2 = make(Dims{4 * d, d});
        layer.b2 = make(Dims{d});
        layer.ln1_gamma = make(Dims{d});
        layer.ln1_beta = make(Dims{d});
        layer.ln2_gamma = make(Dims{d});
        layer.ln2_beta = make(Dims{d});
    }
    return w;
}

const Dims& tensor_dims(const RealTensor& t) { return t.dims; }
const Dims& tensor_dims(const FxTensor& t) { return t.dims(); }

template <class W>
void check_layout(const W& w, const ModelConfig& m) {
    const auto expected = parameter_layout(m);
    std::size_t i = 0;
    bool count_ok = w.layers.size() == static_cast<std::size_t>(std::max(m.num_layers, 0));
    for (const auto& layer : w.layers) {
        count_ok = count_ok && layer.heads.size() == static_cast<std::size_t>(m.num_heads);
    }
    if (!count_ok) {
        throw ShapeError("weights do not have num_layers x num_heads entries for this config");
    }
    for_each_parameter(w, [&](const std::string& name, const auto& t) {
        if (tensor_dims(t) != expected[i].dims) {
            throw ShapeError("parameter " + name + " has dims " + dims_to_string(tensor_dims(t)) +
                             ", expected " + dims_to_string(expected[i].dims));
        }
        ++i;
    });
}

}  // namespace

RealWeights make_real_weights(const ModelConfig& m) {
    return make_weights<RealTensor>(m, [](Dims d) { return RealTensor(std::move(d)); });
}

FxWeights make_fx_weights(const ModelConfig& m, FixedFormat f) {
    return make_weights<FxTensor>(m, [f](Dims d) { return FxTensor(std::move(d), f); });
}

std::vector<ParamSpec> parameter_layout(const ModelConfig& m) {
    std::vector<ParamSpec> out;
    const auto w = make_real_weights(m);
    for_each_parameter(w, [&](const std::string& name, const RealTensor& t) {
        out.push_back(ParamSpec{name, t.dims});
    });
    return out;
}

void check_shapes(const RealWeights& w, const ModelConfig& m) {
    check_layout(w, m);
}

void check_shapes(const FxWeights& w, const ModelConfig& m, FixedFormat f) {
    check_layout(w, m);
    for_each_parameter(w, [&](const std::string& name, const FxTensor& t) {
        if (!(t.format == f)) {
            throw ShapeError("parameter " + name + " is in " + t.format.name() + ", expected " +
                             f.name());
        }
    });
}

FxWeights quantize_weights(const RealWeights& w, FixedFormat f) {
    FxWeights out;
    out.layers.resize(w.layers.size());
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& src = w.layers[l];
        auto& dst = out.layers[l];
        auto q = [f](const RealTensor& t) { return quantize_tensor(t, f); };
        dst.heads.resize(src.heads.size());
        for (std::size_t h = 0; h < src.heads.size(); ++h) {
            const auto& s = src.heads[h];
            dst.heads[h] = HeadWeights<FxTensor>{q(s.wq), q(s.wk), q(s.wv), q(s.bq), q(s.bk), q(s.bv)};
        }
        dst.wo = q(src.wo);
        dst.bo = q(src.bo);
        dst.w1 = q(src.w1);
        dst.b1 = q(src.b1);
        dst.w2 = q(src.w2);
        dst.b2 = q(src.b2);
        dst.ln1_gamma = q(src.ln1_gamma);
        dst.ln1_beta = q(src.ln1_beta);
        dst.ln2_gamma = q(src.ln2_gamma);
        dst.ln2_beta = q(src.ln2_beta);
    }
    return out;
}

RealWeights dequantize_weights(const FxWeights& w) {
    RealWeights out;
    out.layers.resize(w.layers.size());
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& src = w.layers[l];
        auto& dst = out.layers[l];
        auto dq = [](const FxTensor& t) { return dequantize_tensor(t); };
        dst.heads.resize(src.heads.size());
        for (std::size_t h = 0; h < src.heads.size(); ++h) {
            const auto& s = src.heads[h];
            dst.heads[h] =
                HeadWeights<RealTensor>{dq(s.wq), dq(s.wk), dq(s.wv), dq(s.bq), dq(s.bk), dq(s.bv)};
        }
        dst.wo = dq(src.wo);
        dst.bo = dq(src.bo);
        dst.w1 = dq(src.w1);
        dst.b1 = dq(src.b1);
        dst.w2 = dq(src.w2);
        dst.b2 = dq(src.b2);
        dst.ln1_gamma = dq(src.ln1_gamma);
        dst.ln1_beta = dq(src.ln1_beta);
        dst.ln2_gamma = dq(src.ln2_gamma);
        dst.ln2_beta = dq(src.ln2_beta);
    }
    return out;
}

}  // namespace tesim
