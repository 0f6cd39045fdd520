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

#include "tesim/config.hpp"
#include "test_util.hpp"

namespace tesim {
namespace {

using testing::model;

constexpr const char* kTest1Doc = R"({
  "model": {"d_model": 768, "num_heads": 8, "num_layers": 12, "seq_len": 64},
  "hardware": {"ts_mha": 64, "ts_ffn": 128, "clock_mhz": 200}
})";

std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(ParseConfig, Test1Document) {
    const auto cfg = parse_config(kTest1Doc);
    EXPECT_EQ(cfg.model, model(768, 8, 12, 64));
    EXPECT_EQ(cfg.hardware.ts_mha, 64);
    EXPECT_EQ(cfg.hardware.ts_ffn, 128);
    EXPECT_DOUBLE_EQ(cfg.hardware.clock_mhz, 200.0);
    EXPECT_EQ(cfg.hardware.fx_format, (FixedFormat{8, 4}));
    EXPECT_EQ(cfg.hardware.max_model, cfg.model);
    EXPECT_EQ(cfg.device, u55c_profile());
    EXPECT_TRUE(validate(cfg.model, cfg.hardware).ok());
}

TEST(ParseConfig, Defaults) {
    const auto cfg = parse_config(kTest1Doc);
    EXPECT_EQ(cfg.model.scale_mode, ScaleMode::sqrt_dk);
    EXPECT_EQ(cfg.model.activation, Activation::relu);
    EXPECT_TRUE(cfg.model.use_residual);
    EXPECT_FALSE(cfg.model.mask_enabled);
    EXPECT_FALSE(cfg.hardware.per_tile_requantize);
    EXPECT_EQ(cfg.hardware.pipeline.pd_load(), 13);
}

TEST(ParseConfig, EmptyDocumentNamesFirstMissingKey) {
    EXPECT_NE(error_of("").find("missing required key d_model"), std::string::npos);
    EXPECT_NE(error_of("{}").find("missing required key d_model"), std::string::npos);
}

TEST(ParseConfig, RejectsUnknownKeys) {
    EXPECT_NE(error_of(R"({"model": {"d_model": 8, "num_heads": 1, "num_layers": 1, "seq_len": 1, "dmodel": 3},
                          "hardware": {"ts_mha": 8, "ts_ffn": 8, "clock_mhz": 100}})")
                  .find("dmodel"),
              std::string::npos);
}

TEST(ParseConfig, SyntaxErrorReportsPosition) {
    EXPECT_NE(error_of("{\"model\": ").find("syntax error at byte"), std::string::npos);
}

TEST(ParseConfig, BadEnumerations) {
    EXPECT_FALSE(error_of(R"({"model": {"d_model": 8, "num_heads": 1, "num_layers": 1, "seq_len": 1, "activation": "tanh"},
                             "hardware": {"ts_mha": 8, "ts_ffn": 8, "clock_mhz": 100}})")
                     .empty());
}

TEST(ParseConfig, PartialDeviceIsAnError) {
    EXPECT_FALSE(error_of(R"({"model": {"d_model": 8, "num_heads": 1, "num_layers": 1, "seq_len": 1},
                             "hardware": {"ts_mha": 8, "ts_ffn": 8, "clock_mhz": 100},
                             "device": {"name": "x"}})")
                     .empty());
}

TEST(ParseConfig, RoundTripsRandomConfigs) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        auto c = testing::random_small_case(rng, FixedFormat{rng() % 2 ? 8 : 16, 1 + static_cast<int>(rng() % 7)});
        ParsedConfig cfg{c.m, c.hw, u55c_profile()};
        cfg.hardware.per_tile_requantize = rng() % 2;
        cfg.hardware.max_model.seq_len += static_cast<int>(rng() % 5);
        cfg.hardware.pipeline.pd_ba_cc = static_cast<int>(rng() % 9);
        cfg.model.mask_enabled = rng() % 2;
        EXPECT_EQ(parse_config(render_config(cfg)), cfg);
    }
}

TEST(Validate, Test1Ok) {
    EXPECT_TRUE(validate(model(768, 8, 12, 64), testing::test1_hardware()).ok());
}

TEST(Validate, HeadsMustDivide) {
    auto m = model(770, 8, 12, 64);
    auto hw = testing::hardware(m, 770, 770);
    const auto r = validate(m, hw);
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.joined().find("d_model not divisible by num_heads"), std::string::npos);
}

TEST(Validate, TilesMustDivideAndFit) {
    auto m = model(768, 8, 1, 4);
    EXPECT_NE(validate(m, testing::hardware(m, 100, 128)).joined().find("d_model not divisible by ts_mha"),
              std::string::npos);
    EXPECT_NE(validate(m, testing::hardware(m, 64, 1536)).joined().find("ts_ffn exceeds d_model"),
              std::string::npos);
}

TEST(Validate, MaximaEnforced) {
    auto hw = testing::test1_hardware();
    auto m = testing::test1_model();
    m.seq_len = 128;
    const auto r = validate(m, hw);
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.joined().find("exceeds synthesis-time maximum"), std::string::npos);
}

TEST(Validate, CollectsEveryViolationWithoutThrowing) {
    ModelConfig m;  // all zero
    HardwareConfig hw;
    hw.fx_format = {12, 20};
    const auto r = validate(m, hw);
    EXPECT_GE(r.violations.size(), 6u);
    EXPECT_THROW(require_valid(m, hw), ConfigError);
}

TEST(DerivedDims, Test1) {
    const auto d = derived_dims(testing::test1_model(), testing::test1_hardware());
    EXPECT_EQ(d, (DerivedDims{96, 12, 6, 36, 144}));
}

TEST(DerivedDims, SingleTile) {
    auto m = model(32, 2, 1, 4);
    EXPECT_EQ(derived_dims(m, testing::hardware(m, 32, 32)), (DerivedDims{16, 1, 1, 1, 4}));
}

TEST(DerivedDims, SmallerModel) {
    auto m = model(256, 8, 12, 64);
    EXPECT_EQ(derived_dims(m, testing::hardware(m, 64, 128)).tiles_mha, 4);
}

TEST(DerivedDims, TilesTimesWidthIsDModel) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const auto c = testing::random_small_case(rng);
        ASSERT_TRUE(validate(c.m, c.hw).ok());
        const auto d = derived_dims(c.m, c.hw);
        EXPECT_EQ(d.tiles_mha * c.hw.ts_mha, c.m.d_model);
        EXPECT_EQ(d.tiles_ffn * c.hw.ts_ffn, c.m.d_model);
    }
}

TEST(FixedFormatTest, NamesAndRanges) {
    EXPECT_EQ((FixedFormat{8, 4}).name(), "Q4.4");
    EXPECT_EQ((FixedFormat{16, 8}).name(), "Q8.8");
    EXPECT_EQ((FixedFormat{8, 4}).max_raw(), 127);
    EXPECT_DOUBLE_EQ((FixedFormat{8, 4}).min_value(), -8.0);
    EXPECT_FALSE((FixedFormat{32, 4}).valid());
    EXPECT_FALSE((FixedFormat{8, 0}).valid());
}

}  // namespace
}  // namespace tesim
