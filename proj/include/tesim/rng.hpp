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

#include "tesim/config.hpp"
#include "tesim/fixed_point.hpp"
#include "tesim/weights.hpp"

namespace tesim {

/// 64-bit mixing generator: golden-ratio state increment, two-stage
/// xor-shift-multiply finalizer.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Top 53 bits of next() mapped to [-1, 1).
    double next_symmetric();

private:
    std::uint64_t state_;
};

/// Mixed into the seed so input draws never alias the weight stream.
inline constexpr std::uint64_t kInputSeedSalt = 0xA5A5A5A5A5A5A5A5ull;

/// Draws every parameter from [-1, 1) in parameter_layout order.
RealWeights generate_real_weights(std::uint64_t seed, const ModelConfig& m);
FxWeights generate_weights(std::uint64_t seed, const ModelConfig& m, FixedFormat f);

/// SL x d_model input drawn from seed ^ kInputSeedSalt.
RealTensor generate_real_input(std::uint64_t seed, const ModelConfig& m);
FxTensor generate_input(std::uint64_t seed, const ModelConfig& m, FixedFormat f);

}  // namespace tesim
