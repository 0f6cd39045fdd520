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

#include <algorithm>
#include <type_traits>
#include <utility>
#include <string>
#include <vector>

#include "tesim/config.hpp"
#include "tesim/fixed_point.hpp"
#include "tesim/tensor.hpp"

namespace tesim {

/// Per-head projection parameters: W_* are d_model x d_k, B_* are length d_k.
template <class T>
struct HeadWeights {
    T wq, wk, wv;
    T bq, bk, bv;

    friend bool operator==(const HeadWeights&, const HeadWeights&) = default;
};

template <class T>
struct LayerWeights {
    std::vector<HeadWeights<T>> heads;
    T wo, bo;  // d_model x d_model, d_model
    T w1, b1;  // d_model x 4*d_model, 4*d_model
    T w2, b2;  // 4*d_model x d_model, d_model
    T ln1_gamma, ln1_beta;
    T ln2_gamma, ln2_beta;

    friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

template <class T>
struct EncoderWeights {
    std::vector<LayerWeights<T>> layers;

    friend bool operator==(const EncoderWeights&, const EncoderWeights&) = default;
};

using RealWeights = EncoderWeights<RealTensor>;
using FxWeights = EncoderWeights<FxTensor>;

/// One named parameter slot, e.g. "layers.0.head1.wq".
struct ParamSpec {
    std::string name;
    Dims dims;
};

/// Every parameter of an N-layer encoder in canonical fill order: layers
/// outer, parameter names ascending within a layer. Tensors are row-major.
std::vector<ParamSpec> parameter_layout(const ModelConfig& m);

/// Visits (name, tensor) pairs of `w` in parameter_layout order.
template <class W, class Fn>
void for_each_parameter(W& w, Fn&& fn) {
    using Tensor = std::remove_reference_t<decltype((w.layers[0].wo))>;
    std::vector<std::pair<std::string, Tensor*>> slots;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        auto& layer = w.layers[l];
        slots.clear();
        for (std::size_t h = 0; h < layer.heads.size(); ++h) {
            auto& hd = layer.heads[h];
            const std::string p = "head" + std::to_string(h) + ".";
            slots.emplace_back(p + "bk", &hd.bk);
            slots.emplace_back(p + "bq", &hd.bq);
            slots.emplace_back(p + "bv", &hd.bv);
            slots.emplace_back(p + "wk", &hd.wk);
            slots.emplace_back(p + "wq", &hd.wq);
            slots.emplace_back(p + "wv", &hd.wv);
        }
        slots.emplace_back("b1", &layer.b1);
        slots.emplace_back("b2", &layer.b2);
        slots.emplace_back("bo", &layer.bo);
        slots.emplace_back("ln1_beta", &layer.ln1_beta);
        slots.emplace_back("ln1_gamma", &layer.ln1_gamma);
        slots.emplace_back("ln2_beta", &layer.ln2_beta);
        slots.emplace_back("ln2_gamma", &layer.ln2_gamma);
        slots.emplace_back("w1", &layer.w1);
        slots.emplace_back("w2", &layer.w2);
        slots.emplace_back("wo", &layer.wo);
        std::sort(slots.begin(), slots.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [name, tensor] : slots) {
            fn("layers." + std::to_string(l) + "." + name, *tensor);
        }
    }
}

/// Allocates zero-filled weights with the shapes implied by m.
RealWeights make_real_weights(const ModelConfig& m);
FxWeights make_fx_weights(const ModelConfig& m, FixedFormat f);

/// Throws ShapeError when any tensor does not match m (or formats differ).
void check_shapes(const RealWeights& w, const ModelConfig& m);
void check_shapes(const FxWeights& w, const ModelConfig& m, FixedFormat f);

FxWeights quantize_weights(const RealWeights& w, FixedFormat f);
RealWeights dequantize_weights(const FxWeights& w);

}  // namespace tesim

