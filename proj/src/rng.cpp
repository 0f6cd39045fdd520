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

#include "tesim/rng.hpp"

#include <cmath>

namespace tesim {

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double SplitMix64::next_symmetric() {
    const double unit = std::ldexp(static_cast<double>(next() >> 11), -53);
    return 2.0 * unit - 1.0;
}

RealWeights generate_real_weights(std::uint64_t seed, const ModelConfig& m) {
    RealWeights w = make_real_weights(m);
    SplitMix64 rng(seed);
    for_each_parameter(w, [&](const std::string&, RealTensor& t) {
        for (auto& v : t.data) v = rng.next_symmetric();
    });
    return w;
}

FxWeights generate_weights(std::uint64_t seed, const ModelConfig& m, FixedFormat f) {
    return quantize_weights(generate_real_weights(seed, m), f);
}

RealTensor generate_real_input(std::uint64_t seed, const ModelConfig& m) {
    RealTensor x({static_cast<std::size_t>(m.seq_len), static_cast<std::size_t>(m.d_model)});
    SplitMix64 rng(seed ^ kInputSeedSalt);
    for (auto& v : x.data) v = rng.next_symmetric();
    return x;
}

FxTensor generate_input(std::uint64_t seed, const ModelConfig& m, FixedFormat f) {
    return quantize_tensor(generate_real_input(seed, m), f);
}

}  // namespace tesim
