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

#include "tesim/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tesim {

namespace {

// out = x * w + b, summed in ascending index order.
RealTensor affine(const RealTensor& x, const RealTensor& w, const RealTensor& b) {
    if (x.cols() != w.rows() || w.cols() != b.size()) {
        throw ShapeError("affine: " + dims_to_string(x.dims) + " * " + dims_to_string(w.dims) +
                         " + " + dims_to_string(b.dims));
    }
    RealTensor out(Dims{x.rows(), w.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto acc = out.row(i);
        for (std::size_t k = 0; k < x.cols(); ++k) {
            const double xv = x.at(i, k);
            const auto wr = w.row(k);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += xv * wr[j];
        }
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += b.data[j];
    }
    return out;
}

void check_mask(KeyMask mask, std::size_t seq_len) {
    if (mask.empty()) return;
    if (mask.size() != seq_len) throw ShapeError("key mask length does not match seq_len");
    if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; })) {
        throw ShapeError("key mask removes every position");
    }
}

}  // namespace

std::vector<double> ref_softmax(std::span<const double> row) {
    std::vector<double> out(row.size());
    if (row.empty()) return out;
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = std::exp(row[j] - mx);
        sum += out[j];
    }
    for (auto& v : out) v /= sum;
    return out;
}

std::vector<double> ref_layernorm(std::span<const double> row, std::span<const double> gamma,
                                  std::span<const double> beta) {
    if (row.size() != gamma.size() || row.size() != beta.size()) {
        throw ShapeError("layernorm: row, gamma and beta lengths differ");
    }
    const auto n = static_cast<double>(row.size());
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = (row[j] - mean) * inv * gamma[j] + beta[j];
    }
    return out;
}

double relu(double x) {
    return x > 0.0 ? x : 0.0;
}

double gelu(double x) {
    const double c = std::sqrt(2.0 / std::numbers::pi);
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double activate(double x, Activation a) {
    return a == Activation::relu ? relu(x) : gelu(x);
}

double score_divisor(const ModelConfig& m) {
    return m.scale_mode == ScaleMode::sqrt_dk ? std::sqrt(static_cast<double>(m.d_k()))
                                              : static_cast<double>(m.d_model);
}

RealTensor ref_attention_head(const RealTensor& x, const HeadWeights<RealTensor>& w,
                              const ModelConfig& m, KeyMask mask) {
    const RealTensor q = affine(x, w.wq, w.bq);
    const RealTensor k = affine(x, w.wk, w.bk);
    const RealTensor v = affine(x, w.wv, w.bv);
    const std::size_t sl = x.rows();
    const std::size_t dk = q.cols();
    const bool masked = m.mask_enabled && !mask.empty();
    if (masked) check_mask(mask, sl);
    const double divisor = score_divisor(m);

    RealTensor out(Dims{sl, dk});
    std::vector<double> scores(sl);
    for (std::size_t i = 0; i < sl; ++i) {
        for (std::size_t j = 0; j < sl; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < dk; ++c) s += q.at(i, c) * k.at(j, c);
            scores[j] = (masked && mask[j] == 0) ? -std::numeric_limits<double>::infinity()
                                                 : s / divisor;
        }
        const auto p = ref_softmax(scores);
        for (std::size_t c = 0; c < dk; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < sl; ++j) s += p[j] * v.at(j, c);
            out.at(i, c) = s;
        }
    }
    return out;
}

RealTensor ref_encoder_forward(const RealTensor& x, const RealWeights& w, const ModelConfig& m,
                               KeyMask mask) {
    check_shapes(w, m);
    if (x.rank() != 2 || x.cols() != static_cast<std::size_t>(m.d_model)) {
        throw ShapeError("encoder input must be SL x d_model, got " + dims_to_string(x.dims));
    }
    const std::size_t sl = x.rows();
    const auto d = static_cast<std::size_t>(m.d_model);
    const auto dk = static_cast<std::size_t>(m.d_k());

    auto add_norm = [&](RealTensor y, const RealTensor& residual, const RealTensor& gamma,
                        const RealTensor& beta) {
        if (m.use_residual) {
            for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += residual.data[i];
        }
        for (std::size_t i = 0; i < sl; ++i) {
            const auto normed = ref_layernorm(y.row(i), gamma.data, beta.data);
            std::copy(normed.begin(), normed.end(), y.row(i).begin());
        }
        return y;
    };

    RealTensor cur = x;
    for (const auto& layer : w.layers) {
        RealTensor concat(Dims{sl, d});
        for (std::size_t h = 0; h < layer.heads.size(); ++h) {
            const auto head = ref_attention_head(cur, layer.heads[h], m, mask);
            for (std::size_t i = 0; i < sl; ++i) {
                for (std::size_t c = 0; c < dk; ++c) concat.at(i, h * dk + c) = head.at(i, c);
            }
        }
        RealTensor ln1 = add_norm(affine(concat, layer.wo, layer.bo), cur, layer.ln1_gamma,
                                  layer.ln1_beta);
        RealTensor hidden = affine(ln1, layer.w1, layer.b1);
        for (auto& v : hidden.data) v = activate(v, m.activation);
        cur = add_norm(affine(hidden, layer.w2, layer.b2), ln1, layer.ln2_gamma, layer.ln2_beta);
    }
    return cur;
}

}  // namespace tesim
