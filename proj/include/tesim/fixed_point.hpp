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
#include "tesim/tensor.hpp"

namespace tesim {

using Raw = std::int32_t;
using AccRaw = std::int64_t;

enum class Rounding { half_even, half_away_from_zero };

struct FxValue {
    Raw raw = 0;
    FixedFormat format{};

    double value() const;
    friend bool operator==(const FxValue&, const FxValue&) = default;
};

/// Exact MAC accumulator. raw is scaled by 2^(-2 * frac_bits).
///
/// 64 bits is at least 4x the widest supported operand (16 bits), so any
/// inner product of up to 2^32 full-range 16-bit products is exact.
struct WideAcc {
    AccRaw raw = 0;
    int frac_bits = 0;

    friend bool operator==(const WideAcc&, const WideAcc&) = default;
};

/// A quantized tensor: genuine integer raws in one Q-format.
struct FxTensor {
    Tensor<Raw> raws;
    FixedFormat format{};

    FxTensor() = default;
    FxTensor(Dims dims, FixedFormat f) : raws(std::move(dims)), format(f) {}
    FxTensor(Tensor<Raw> r, FixedFormat f) : raws(std::move(r)), format(f) {}

    const Dims& dims() const { return raws.dims; }
    std::size_t rows() const { return raws.rows(); }
    std::size_t cols() const { return raws.cols(); }
    std::size_t size() const { return raws.size(); }
    Raw& at(std::size_t i, std::size_t j) { return raws.at(i, j); }
    Raw at(std::size_t i, std::size_t j) const { return raws.at(i, j); }

    friend bool operator==(const FxTensor&, const FxTensor&) = default;
};

Raw saturate(AccRaw v, FixedFormat f);
Raw saturating_add(Raw a, Raw b, FixedFormat f);

/// v / 2^shift rounded to an integer. shift >= 0.
AccRaw round_shift(AccRaw v, int shift, Rounding mode = Rounding::half_even);
/// num / den rounded exactly to an integer. den > 0.
AccRaw round_div(AccRaw num, AccRaw den, Rounding mode = Rounding::half_even);

FxValue quantize(double x, FixedFormat f, Rounding mode = Rounding::half_even);
double dequantize(FxValue v);
double dequantize(Raw raw, FixedFormat f);

WideAcc mac(WideAcc acc, FxValue a, FxValue b);
/// acc rescaled from 2^(-2f) to 2^(-f), rounded, then saturated to f.
FxValue requantize(WideAcc acc, FixedFormat f, Rounding mode = Rounding::half_even);
/// requantize(acc) after dividing the accumulated value by a positive divisor.
/// Integral divisors are handled exactly.
Raw requantize_scaled(AccRaw acc, FixedFormat f, double divisor,
                      Rounding mode = Rounding::half_even);

/// Aligns an f-format raw (e.g. a bias) with a 2^(-2f) accumulator.
inline AccRaw widen(Raw raw, FixedFormat f) {
    return static_cast<AccRaw>(raw) * (AccRaw{1} << f.frac_bits);
}

FxTensor quantize_tensor(const RealTensor& xs, FixedFormat f, Rounding mode = Rounding::half_even);
RealTensor dequantize_tensor(const FxTensor& t);

}  // namespace tesim
