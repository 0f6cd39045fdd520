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

#include "tesim/untiled_oracle.hpp"

#include <cmath>
#include <limits>

namespace tesim::oracle {

FxTensor affine(const FxTensor& x, const FxTensor& w, const FxTensor& b) {
    const FixedFormat f = x.format;
    if (x.cols() != w.rows() || w.cols() != b.size()) throw ShapeError("oracle affine: shape mismatch");
    FxTensor out(Dims{x.rows(), w.cols()}, f);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            WideAcc acc{widen(b.raws.data[j], f), f.frac_bits};
            for (std::size_t k = 0; k < x.cols(); ++k) {
                acc = mac(acc, FxValue{x.at(i, k), f}, FxValue{w.at(k, j), f});
            }
            out.at(i, j) = requantize(acc, f).raw;
        }
    }
    return out;
}

namespace {

FxTensor attention_head(const FxTensor& x, const HeadWeights<FxTensor>& hw, const ModelConfig& m,
                        KeyMask mask) {
    const FixedFormat f = x.format;
    const FxTensor q = affine(x, hw.wq, hw.bq);
    const FxTensor k = affine(x, hw.wk, hw.bk);
    const FxTensor v = affine(x, hw.wv, hw.bv);
    const std::size_t sl = x.rows();
    const std::size_t dk = q.cols();
    const double divisor = score_divisor(m);
    const bool masked = m.mask_enabled && !mask.empty();

    FxTensor out(Dims{sl, dk}, f);
    std::vector<Raw> probs(sl);
    std::vector<double> row(sl);
    for (std::size_t i = 0; i < sl; ++i) {
        for (std::size_t j = 0; j < sl; ++j) {
            AccRaw s = 0;
            for (std::size_t c = 0; c < dk; ++c) s += static_cast<AccRaw>(q.at(i, c)) * k.at(j, c);
            const Raw score = requantize_scaled(s, f, divisor);
            row[j] = (masked && mask[j] == 0) ? -std::numeric_limits<double>::infinity()
                                              : dequantize(score, f);
        }
        const auto p = ref_softmax(row);
        for (std::size_t j = 0; j < sl; ++j) probs[j] = quantize(p[j], f).raw;
        for (std::size_t c = 0; c < dk; ++c) {
            WideAcc acc{0, f.frac_bits};
            for (std::size_t j = 0; j < sl; ++j) acc = mac(acc, FxValue{probs[j], f}, FxValue{v.at(j, c), f});
            out.at(i, c) = requantize(acc, f).raw;
        }
    }
    return out;
}

FxTensor add_norm(FxTensor y, const FxTensor& residual, const FxTensor& gamma, const FxTensor& beta,
                  bool use_residual) {
    const FixedFormat f = y.format;
    if (use_residual) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            y.raws.data[i] = saturate(static_cast<AccRaw>(y.raws.data[i]) + residual.raws.data[i], f);
        }
    }
    const auto g = dequantize_tensor(gamma);
    const auto b = dequantize_tensor(beta);
    std::vector<double> row(y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i) {
        for (std::size_t j = 0; j < y.cols(); ++j) row[j] = dequantize(y.at(i, j), f);
        const auto n = ref_layernorm(row, g.data, b.data);
        for (std::size_t j = 0; j < y.cols(); ++j) y.at(i, j) = quantize(n[j], f).raw;
    }
    return y;
}

}  // namespace

FxTensor encoder_forward(const FxTensor& x, const FxWeights& w, const ModelConfig& m, KeyMask mask) {
    const FixedFormat f = x.format;
    check_shapes(w, m, f);
    const std::size_t sl = x.rows();
    const auto dk = static_cast<std::size_t>(m.d_k());
    FxTensor cur = x;
    for (const auto& layer : w.layers) {
        FxTensor concat(Dims{sl, static_cast<std::size_t>(m.d_model)}, f);
        for (std::size_t h = 0; h < layer.heads.size(); ++h) {
            const FxTensor head = attention_head(cur, layer.heads[h], m, mask);
            for (std::size_t i = 0; i < sl; ++i) {
                for (std::size_t c = 0; c < dk; ++c) concat.at(i, h * dk + c) = head.at(i, c);
            }
        }
        FxTensor ln1 = add_norm(affine(concat, layer.wo, layer.bo), cur, layer.ln1_gamma,
                                layer.ln1_beta, m.use_residual);
        FxTensor hidden = affine(ln1, layer.w1, layer.b1);
        for (auto& r : hidden.raws.data) {
            r = m.activation == Activation::relu ? std::max(r, Raw{0})
                                                 : quantize(gelu(dequantize(r, f)), f).raw;
        }
        cur = add_norm(affine(hidden, layer.w2, layer.b2), ln1, layer.ln2_gamma, layer.ln2_beta,
                       m.use_residual);
    }
    return cur;
}

}  // namespace tesim::oracle
