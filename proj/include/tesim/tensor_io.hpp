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
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tesim/config.hpp"
#include "tesim/fixed_point.hpp"
#include "tesim/weights.hpp"

// Little-endian binary formats.
//
// Tensor file: "PTEA1", u8 rank, u32 dims[rank], u8 width_bits, u8 frac_bits,
// then one raw per element (1 byte for 8-bit formats, 2 bytes for 16-bit).
//
// Weight container: "PTEAW", u16 version, u32 tensor count, then per tensor
// u16 name length, UTF-8 name, u8 rank, u32 dims[rank], u8 width_bits,
// u8 frac_bits, raw payload as above.

namespace tesim {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint16_t kWeightContainerVersion = 1;

void write_tensor(std::ostream& out, const FxTensor& t);
FxTensor read_tensor(std::istream& in);
void save_tensor(const std::string& path, const FxTensor& t);
FxTensor load_tensor(const std::string& path);

void write_weights(std::ostream& out, const FxWeights& w);
/// Every parameter of m must be present exactly once with the right shape and format.
FxWeights read_weights(std::istream& in, const ModelConfig& m, FixedFormat f);
void save_weights(const std::string& path, const FxWeights& w);
FxWeights load_weights(const std::string& path, const ModelConfig& m, FixedFormat f);

/// FNV-1a 64 over the tensor file encoding, as 16 hex digits.
std::string tensor_digest(const FxTensor& t);

}  // namespace tesim
