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

#include "tesim/fixed_point.hpp"

#include <algorithm>
#include <cmath>

namespace tesim {

std::string dims_to_string(const Dims& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

double FxValue::value() const {
    return dequantize(raw, format);
}

Raw saturate(AccRaw v, FixedFormat f) {
    return static_cast<Raw>(std::clamp(v, f.min_raw(), f.max_raw()));
}

Raw saturating_add(Raw a, Raw b, FixedFormat f) {
    return saturate(static_cast<AccRaw>(a) + b, f);
}

AccRaw round_div(AccRaw num, AccRaw den, Rounding mode) {
    assert(den > 0);
    const bool negative = num < 0;
    // |INT64_MIN| never occurs: accumulators stay far below 2^62.
    const AccRaw mag = negative ? -num : num;
    AccRaw q = mag / den;
    const AccRaw r = mag % den;
    const AccRaw twice = 2 * r;
    if (twice > den || (twice == den && (mode == Rounding::half_away_from_zero || (q & 1)))) {
        ++q;
    }
    return negative ? -q : q;
}

AccRaw round_shift(AccRaw v, int shift, Rounding mode) {
    if (shift == 0) return v;
    return round_div(v, AccRaw{1} << shift, mode);
}

namespace {

double round_real(double x, Rounding mode) {
    // nearbyint honours the default round-to-nearest-even mode.
    return mode == Rounding::half_even ? std::nearbyint(x) : std::round(x);
}

}  // namespace

FxValue quantize(double x, FixedFormat f, Rounding mode) {
    assert(std::isfinite(x));
    const double scaled = std::ldexp(x, f.frac_bits);
    const double lo = static_cast<double>(f.min_raw());
    const double hi = static_cast<double>(f.max_raw());
    const double r = round_real(std::clamp(scaled, lo - 1.0, hi + 1.0), mode);
    return FxValue{static_cast<Raw>(std::clamp(r, lo, hi)), f};
}

double dequantize(Raw raw, FixedFormat f) {
    return std::ldexp(static_cast<double>(raw), -f.frac_bits);
}

double dequantize(FxValue v) {
    return dequantize(v.raw, v.format);
}

WideAcc mac(WideAcc acc, FxValue a, FxValue b) {
    assert(a.format == b.format);
    acc.frac_bits = a.format.frac_bits;
    acc.raw += static_cast<AccRaw>(a.raw) * b.raw;
    return acc;
}

FxValue requantize(WideAcc acc, FixedFormat f, Rounding mode) {
    return FxValue{saturate(round_shift(acc.raw, f.frac_bits, mode), f), f};
}

Raw requantize_scaled(AccRaw acc, FixedFormat f, double divisor, Rounding mode) {
    assert(divisor > 0.0);
    const double whole = std::floor(divisor);
    if (whole == divisor && whole < 9.0e15) {
        const auto den = static_cast<AccRaw>(whole) << f.frac_bits;
        return saturate(round_div(acc, den, mode), f);
    }
    const long double q = static_cast<long double>(acc) /
                          (std::ldexp(1.0L, f.frac_bits) * static_cast<long double>(divisor));
    const long double lo = static_cast<long double>(f.min_raw()) - 1.0L;
    const long double hi = static_cast<long double>(f.max_raw()) + 1.0L;
    const long double clamped = std::clamp(q, lo, hi);
    const long double r = mode == Rounding::half_even ? std::nearbyint(clamped) : std::round(clamped);
    return saturate(static_cast<AccRaw>(r), f);
}

FxTensor quantize_tensor(const RealTensor& xs, FixedFormat f, Rounding mode) {
    FxTensor out(xs.dims, f);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out.raws.data[i] = quantize(xs.data[i], f, mode).raw;
    }
    return out;
}

RealTensor dequantize_tensor(const FxTensor& t) {
    RealTensor out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i) {
        out.data[i] = dequantize(t.raws.data[i], t.format);
    }
    return out;
}

}  // namespace tesim
