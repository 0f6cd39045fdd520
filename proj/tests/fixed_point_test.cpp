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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "tesim/fixed_point.hpp"
#include "tesim/rng.hpp"

namespace tesim {
namespace {

constexpr FixedFormat kQ44{8, 4};
constexpr FixedFormat kQ88{16, 8};

// Round-half-even of num/den by floor division and remainder comparison.
AccRaw oracle_round_div(AccRaw num, AccRaw den) {
    AccRaw q = num / den;
    AccRaw r = num % den;
    if (r < 0) {
        r += den;
        --q;
    }
    if (2 * r > den || (2 * r == den && (q & 1))) ++q;
    return q;
}

TEST(Quantize, Examples) {
    EXPECT_EQ(quantize(1.0, kQ44).raw, 16);
    EXPECT_EQ(quantize(100.0, kQ44).raw, 127);
    EXPECT_DOUBLE_EQ(quantize(100.0, kQ44).value(), 7.9375);
    EXPECT_EQ(quantize(0.1, kQ44).raw, 2);
    EXPECT_EQ(quantize(-100.0, kQ44).raw, -128);
}

TEST(Quantize, HalfEvenTies) {
    EXPECT_EQ(quantize(0.03125, kQ44).raw, 0);   // 0.5 lsb
    EXPECT_EQ(quantize(0.09375, kQ44).raw, 2);   // 1.5 lsb
    EXPECT_EQ(quantize(-0.03125, kQ44).raw, 0);
    EXPECT_EQ(quantize(-0.09375, kQ44).raw, -2);
    EXPECT_EQ(quantize(0.09375, kQ44, Rounding::half_away_from_zero).raw, 2);
    EXPECT_EQ(quantize(0.03125, kQ44, Rounding::half_away_from_zero).raw, 1);
}

TEST(Quantize, NonFiniteSaturates) {
    EXPECT_EQ(quantize(std::numeric_limits<double>::infinity(), kQ44).raw, 127);
    EXPECT_EQ(quantize(-std::numeric_limits<double>::infinity(), kQ44).raw, -128);
}

TEST(Dequantize, Examples) {
    EXPECT_DOUBLE_EQ(dequantize(16, kQ44), 1.0);
    EXPECT_DOUBLE_EQ(dequantize(-128, kQ44), -8.0);
    EXPECT_DOUBLE_EQ(dequantize(2, kQ44), 0.125);
}

TEST(Mac, Examples) {
    WideAcc acc{0, 4};
    acc = mac(acc, quantize(1.5, kQ44), quantize(2.0, kQ44));
    EXPECT_EQ(acc.raw, 768);
    acc = mac(acc, quantize(-1.0, kQ44), quantize(3.0, kQ44));
    EXPECT_EQ(acc.raw, 0);
    WideAcc ones{0, 4};
    for (int i = 0; i < 96; ++i) ones = mac(ones, quantize(1.0, kQ44), quantize(1.0, kQ44));
    EXPECT_EQ(ones.raw, 24576);
}

TEST(Requantize, Examples) {
    EXPECT_EQ(requantize({768, 4}, kQ44).raw, 48);
    EXPECT_EQ(requantize({24576, 4}, kQ44).raw, 127);
    EXPECT_EQ(requantize({0, 4}, kQ44).raw, 0);
}

TEST(RoundShift, MatchesOracle) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100000; ++i) {
        const AccRaw v = static_cast<AccRaw>(rng() % 2000001) - 1000000;
        const int s = static_cast<int>(rng() % 12);
        ASSERT_EQ(round_shift(v, s), oracle_round_div(v, AccRaw{1} << s)) << v << " >> " << s;
    }
}

TEST(RoundDiv, MatchesOracle) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100000; ++i) {
        const AccRaw v = static_cast<AccRaw>(rng() % 2000001) - 1000000;
        const AccRaw d = 1 + static_cast<AccRaw>(rng() % 1000);
        ASSERT_EQ(round_div(v, d), oracle_round_div(v, d)) << v << " / " << d;
    }
}

TEST(RequantizeScaled, IntegralDivisorIsExact) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20000; ++i) {
        const AccRaw acc = static_cast<AccRaw>(rng() % 200001) - 100000;
        const AccRaw d = 1 + static_cast<AccRaw>(rng() % 64);
        const AccRaw want = std::clamp<AccRaw>(oracle_round_div(acc, d * 16), -128, 127);
        ASSERT_EQ(requantize_scaled(acc, kQ44, static_cast<double>(d)), want);
    }
}

TEST(RequantizeScaled, IrrationalDivisor) {
    // 3.0 / sqrt(2) = 2.1213 -> 34 lsb in Q4.4.
    EXPECT_EQ(requantize_scaled(768, kQ44, std::sqrt(2.0)), 34);
}

TEST(Saturation, AddAndClamp) {
    EXPECT_EQ(saturating_add(100, 100, kQ44), 127);
    EXPECT_EQ(saturating_add(-100, -100, kQ44), -128);
    EXPECT_EQ(saturating_add(30000, 30000, kQ88), 32767);
    EXPECT_EQ(saturate(1 << 20, kQ44), 127);
}

TEST(QuantizeTensor, Examples) {
    RealTensor eye({2, 2}, std::vector<double>{1, 0, 0, 1});
    EXPECT_EQ(quantize_tensor(eye, kQ44).raws.data, (std::vector<Raw>{16, 0, 0, 16}));
    RealTensor zeros({3, 3});
    EXPECT_EQ(quantize_tensor(zeros, kQ44).raws.data, std::vector<Raw>(9, 0));
}

TEST(QuantizeTensor, MatchesScalarLoop) {
    RealTensor xs({16, 16});
    SplitMix64 rng(42);
    for (auto& v : xs.data) v = rng.next_symmetric();
    const auto t = quantize_tensor(xs, kQ44);
    for (std::size_t i = 0; i < xs.data.size(); ++i) EXPECT_EQ(t.raws.data[i], quantize(xs.data[i], kQ44).raw);
    EXPECT_EQ(dequantize_tensor(t).dims, xs.dims);
}

class FormatProperty : public ::testing::TestWithParam<FixedFormat> {};

TEST_P(FormatProperty, RoundTripWithinHalfLsb) {
    const FixedFormat f = GetParam();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(f.min_value(), f.max_value());
    for (int i = 0; i < 20000; ++i) {
        const double x = dist(rng);
        ASSERT_LE(std::abs(quantize(x, f).value() - x), f.lsb() / 2) << x;
    }
}

TEST_P(FormatProperty, MonotoneAndBounded) {
    const FixedFormat f = GetParam();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-4 * f.max_value(), 4 * f.max_value());
    for (int i = 0; i < 20000; ++i) {
        double x = dist(rng), y = dist(rng);
        if (x > y) std::swap(x, y);
        ASSERT_LE(quantize(x, f).raw, quantize(y, f).raw);
        ASSERT_LE(std::abs(quantize(x, f).value()), -f.min_value());
        ASSERT_GE(quantize(x, f).raw, f.min_raw());
        ASSERT_LE(quantize(x, f).raw, f.max_raw());
    }
}

TEST_P(FormatProperty, MacIsOrderIndependent) {
    const FixedFormat f = GetParam();
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<FxValue, FxValue>> terms;
        for (int i = 0; i < 64; ++i) {
            terms.push_back({FxValue{static_cast<Raw>(f.min_raw() + static_cast<AccRaw>(rng() % (f.max_raw() - f.min_raw() + 1))), f},
                             FxValue{static_cast<Raw>(f.min_raw() + static_cast<AccRaw>(rng() % (f.max_raw() - f.min_raw() + 1))), f}});
        }
        WideAcc a{0, f.frac_bits};
        for (auto& [x, y] : terms) a = mac(a, x, y);
        std::shuffle(terms.begin(), terms.end(), rng);
        WideAcc b{0, f.frac_bits};
        for (auto& [x, y] : terms) b = mac(b, x, y);
        ASSERT_EQ(a, b);
    }
}

INSTANTIATE_TEST_SUITE_P(Formats, FormatProperty,
                         ::testing::Values(FixedFormat{8, 4}, FixedFormat{8, 6}, FixedFormat{16, 8},
                                           FixedFormat{16, 12}),
                         [](const auto& info) {
                             return "W" + std::to_string(info.param.width_bits) + "F" +
                                    std::to_string(info.param.frac_bits);
                         });

}  // namespace
}  // namespace tesim
