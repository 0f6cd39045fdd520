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

#include <cstdint>
#include <span>
#include <vector>

#include "tesim/config.hpp"
#include "tesim/tensor.hpp"
#include "tesim/weights.hpp"

// Double-precision encoder forward pass. This is the functional golden model
// that the fixed-point engines are measured against.

namespace tesim {

/// Key padding mask, one entry per sequence position; nonzero keeps the key.
/// An empty span means "no padding". Only honoured when mask_enabled is set.
using KeyMask = std::span<const std::uint8_t>;

inline constexpr double kLayerNormEpsilon = 1e-5;

/// Numerically stable softmax (max-subtracted). -inf entries get weight 0.
std::vector<double> ref_softmax(std::span<const double> row);

/// Population-variance layer norm with epsilon 1e-5.
std::vector<double> ref_layernorm(std::span<const double> row, std::span<const double> gamma,
                                  std::span<const double> beta);

double relu(double x);
/// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
double gelu(double x);
double activate(double x, Activation a);

/// Divisor applied to Q K^T before the softmax.
double score_divisor(const ModelConfig& m);

/// softmax(scale(Q K^T)) V for one head. X is SL x d_model; returns SL x d_k.
RealTensor ref_attention_head(const RealTensor& x, const HeadWeights<RealTensor>& w,
                              const ModelConfig& m, KeyMask mask = {});

/// Runs m.num_layers post-LN encoder layers. num_layers == 0 returns X.
RealTensor ref_encoder_forward(const RealTensor& x, const RealWeights& w, const ModelConfig& m,
                               KeyMask mask = {});

}  // namespace tesim
