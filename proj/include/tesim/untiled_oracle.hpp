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

#include "tesim/config.hpp"
#include "tesim/fixed_point.hpp"
#include "tesim/reference.hpp"
#include "tesim/weights.hpp"

// Monolithic fixed-point encoder with no tiling and no on-chip buffer model.
// Every dot product runs over the full inner dimension in one accumulator,
// so it serves as the bit-exact target for the tiled engines in wide mode.

namespace tesim::oracle {

/// requantize(x * w + b) with one full-length accumulation per element.
FxTensor affine(const FxTensor& x, const FxTensor& w, const FxTensor& b);

FxTensor encoder_forward(const FxTensor& x, const FxWeights& w, const ModelConfig& m,
                         KeyMask mask = {});

}  // namespace tesim::oracle
