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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tesim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
        write("small.json", R"({"model": {"d_model": 32, "num_heads": 2, "num_layers": 1, "seq_len": 8},
                              "hardware": {"ts_mha": 8, "ts_ffn": 8, "clock_mhz": 200}})");
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& body) const {
        std::ofstream(path(name)) << body;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(path(name), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run(const std::string& args, const std::string& env = "") const {
        const std::string cmd = env + " " + TESIM_CLI_PATH + " " + args + " > " + path("stdout.txt") + " 2> " +
                                path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    }

    fs::path dir_;
};

TEST_F(Cli, VerifySucceeds) {
    EXPECT_EQ(run("verify --config " + path("small.json") + " --seed 7"), 0);
    EXPECT_NE(read("stdout.txt").find("tiled==untiled: exact"), std::string::npos);
}

TEST_F(Cli, VerifyInvariantViolationExitsThree) {
    EXPECT_EQ(run("verify --config " + path("small.json") + " --seed 7 --inject-fault"), 3);
    EXPECT_NE(read("stdout.txt").find("VIOLATION"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
    write("bad.json", R"({"model": {"d_model": 30, "num_heads": 4, "num_layers": 1, "seq_len": 8},
                         "hardware": {"ts_mha": 8, "ts_ffn": 8, "clock_mhz": 200}})");
    EXPECT_EQ(run("estimate --config " + path("bad.json")), 2);
    EXPECT_NE(read("stderr.txt").find("d_model not divisible by num_heads"), std::string::npos);
    EXPECT_EQ(run("estimate --config " + path("missing.json")), 2);
    write("empty.json", "");
    EXPECT_EQ(run("estimate --config " + path("empty.json")), 2);
    EXPECT_NE(read("stderr.txt").find("missing required key d_model"), std::string::npos);
    EXPECT_EQ(run("estimate"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, DseInfeasibleExitsFour) {
    write("tiny.json", R"({"model": {"d_model": 32, "num_heads": 2, "num_layers": 1, "seq_len": 8},
                          "hardware": {"ts_mha": 8, "ts_ffn": 8, "clock_mhz": 200},
                          "device": {"name": "tiny", "dsp_total": 4, "lut_total": 1, "bram36_total": 1}})");
    write("sweep.json", R"({"tiles_mha": [1, 2, 4], "tiles_ffn": [2, 4]})");
    EXPECT_EQ(run("dse --config " + path("tiny.json") + " --sweep " + path("sweep.json")), 4);
    EXPECT_NE(read("stdout.txt").find("infeasible sweep"), std::string::npos);
    EXPECT_EQ(run("dse --config " + path("small.json") + " --sweep " + path("sweep.json") + " --report " +
                  path("dse.json")),
              0);
    EXPECT_NE(read("dse.json").find("\"selection\""), std::string::npos);
}

TEST_F(Cli, SimulateAndFileRoundTrip) {
    EXPECT_EQ(run("generate --config " + path("small.json") + " --seed 4 --weights-out " + path("w.bin") +
                  " --input-out " + path("x.bin")),
              0);
    EXPECT_EQ(run("simulate --config " + path("small.json") + " --weights " + path("w.bin") + " --input " +
                  path("x.bin") + " --out " + path("a.bin") + " --report " + path("a.json")),
              0);
    EXPECT_EQ(run("simulate --config " + path("small.json") + " --seed 4 --out " + path("b.bin") + " --report " +
                  path("b.json")),
              0);
    EXPECT_EQ(read("a.bin"), read("b.bin"));
    EXPECT_EQ(read("a.bin").substr(0, 5), "PTEA1");
    EXPECT_EQ(run("simulate --config " + path("small.json") + " --out " + path("c.bin")), 2);
    EXPECT_EQ(run("simulate --config " + path("small.json") + " --weights " + path("x.bin") + " --seed 1 --out " +
                  path("c.bin")),
              1);
}

TEST_F(Cli, ReportBytesIndependentOfThreads) {
    const std::string args = "simulate --config " + path("small.json") + " --seed 42 --out ";
    ASSERT_EQ(run(args + path("o1.bin") + " --report " + path("r1.json"), "PROTEA_SIM_THREADS=1"), 0);
    ASSERT_EQ(run(args + path("o8.bin") + " --report " + path("r8.json"), "PROTEA_SIM_THREADS=8"), 0);
    EXPECT_EQ(read("r1.json"), read("r8.json"));
    EXPECT_EQ(read("o1.bin"), read("o8.bin"));
}

TEST_F(Cli, JsonToStdout) {
    EXPECT_EQ(run("estimate --json --config " + path("small.json")), 0);
    EXPECT_EQ(read("stdout.txt").rfind("{\n  \"command\": \"estimate\"", 0), 0u);
}

}  // namespace
