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

#include <random>

#include <gtest/gtest.h>

#include "tesim/resources.hpp"
#include "test_util.hpp"

namespace tesim {
namespace {

using testing::hardware;
using testing::model;

TEST(PeCountsTest, Test1) {
    const auto pe = pe_counts(testing::test1_model(), testing::test1_hardware());
    EXPECT_EQ(pe.qkv_per_head, 192);
    EXPECT_EQ(pe.qk_per_head, 96);
    EXPECT_EQ(pe.sv_per_head, 64);
    EXPECT_EQ(pe.ffn1, 128);
    EXPECT_EQ(pe.ffn2, 128);
    EXPECT_EQ(pe.ffn3, 512);
}

TEST(PeCountsTest, Degenerate) {
    auto m = model(16, 1, 1, 1);
    const auto pe = pe_counts(m, hardware(m, 16, 16));
    EXPECT_EQ(pe.qkv_per_head, 48);
    EXPECT_EQ(pe.sv_per_head, 1);
}

TEST(DspEstimate, Test1) {
    EXPECT_EQ(dsp_estimate(testing::test1_model(), testing::test1_hardware()), 4352);
    const auto r = estimate_resources(testing::test1_model(), testing::test1_hardware(), u55c_profile());
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.dsp_utilization, 0.482, 0.0005);
    EXPECT_EQ(r.dsp_estimate - kSynthesizedDsp, 740);
}

TEST(DspEstimate, UnitConfig) {
    auto m = model(1, 1, 1, 1);
    EXPECT_EQ(dsp_estimate(m, hardware(m, 1, 1)), 12);
}

TEST(DspEstimate, DoublingHeadsDoublesHeadTerms) {
    auto m = model(768, 8, 1, 64);
    auto m2 = model(768, 16, 1, 64);
    auto hw = hardware(m2, 64, 128);
    const auto a = pe_counts(m, hw), b = pe_counts(m2, hw);
    EXPECT_EQ(b.heads * b.qkv_per_head, 2 * a.heads * a.qkv_per_head);
    EXPECT_EQ(b.heads * b.sv_per_head, 2 * a.heads * a.sv_per_head);
    EXPECT_EQ(b.ffn1 + b.ffn2 + b.ffn3, a.ffn1 + a.ffn2 + a.ffn3);
}

TEST(DspEstimate, PeSumPlusOverhead) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 300; ++i) {
        const auto c = testing::random_small_case(rng);
        const auto pe = pe_counts(c.m, c.hw);
        EXPECT_EQ(dsp_estimate(c.m, c.hw), pe.total() + c.m.d_model);
        const std::int64_t formula = 3LL * c.m.num_heads * c.hw.ts_mha +
                                     static_cast<std::int64_t>(c.m.num_heads) * (c.m.d_k() + c.m.seq_len) +
                                     6LL * c.hw.ts_ffn + c.m.d_model;
        EXPECT_EQ(dsp_estimate(c.m, c.hw), formula);
    }
}

TEST(DspEstimate, MonotoneAndBudgetAntitone) {
    DeviceProfile tiny{"tiny", 600, 1, 1000000};
    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        const auto c = testing::random_small_case(rng);
        const auto base = dsp_estimate(c.m, c.hw);
        auto sl = c.m;
        sl.seq_len += 1;
        auto hs = c.m;
        hs.seq_len *= 2;
        auto hw2 = c.hw;
        hw2.ts_ffn *= 2;
        EXPECT_LE(base, dsp_estimate(sl, c.hw));
        EXPECT_LE(base, dsp_estimate(hs, c.hw));
        EXPECT_LE(base, dsp_estimate(c.m, hw2));
        const bool small_ok = estimate_resources(c.m, c.hw, tiny).feasible;
        const bool big_ok = estimate_resources(sl, c.hw, tiny).feasible;
        EXPECT_FALSE(!small_ok && big_ok);
    }
}

TEST(BramBlocks, Granularity) {
    EXPECT_EQ(bram_blocks(64 * 64 * 8), 1.0);
    EXPECT_EQ(bram_blocks(4 * 4 * 8), 0.5);
    EXPECT_EQ(bram_blocks(18432), 0.5);
    EXPECT_EQ(bram_blocks(18433), 1.0);
    EXPECT_EQ(bram_blocks(36865), 2.0);
    EXPECT_EQ(bram_blocks(0), 0.0);
}

TEST(BramEstimate, Test1Inventory) {
    // Hand tally, 8-bit words: input tiles 8x1, weight tiles 24x2, Q/K/V/SV 32x2,
    // scores 8x1, qkv bias 3x0.5, FFN weight tile 15, FFN input tile 2,
    // activations 11+11+43+11, FFN biases 0.5+0.5+1, LN vectors 4x0.5.
    const double hand = 8 + 48 + 64 + 8 + 1.5 + 15 + 2 + 11 + 11 + 43 + 11 + 1 + 1 + 2;
    EXPECT_EQ(hand, 226.5);
    EXPECT_EQ(bram_estimate(testing::test1_model(), testing::test1_hardware()), hand);
    const auto r = estimate_resources(testing::test1_model(), testing::test1_hardware(), u55c_profile());
    EXPECT_NEAR(r.bram_utilization, 226.5 / 2016, 1e-12);
}

TEST(BudgetCheck, Examples) {
    auto m = testing::test1_model();
    auto hw = testing::test1_hardware();
    hw.ts_mha = 768;
    const auto r = estimate_resources(m, hw, u55c_profile());
    EXPECT_EQ(r.pe.heads * r.pe.qkv_per_head, 18432);
    EXPECT_FALSE(r.feasible);
    ResourceReport zero;
    EXPECT_TRUE(budget_check(zero, u55c_profile()).feasible);
}

TEST(Device, U55cProfile) {
    const auto d = u55c_profile();
    EXPECT_EQ(d.dsp_total, 9024);
    EXPECT_EQ(d.lut_total, 1303680);
    EXPECT_EQ(d.bram36_total, 2016);
}

}  // namespace
}  // namespace tesim
