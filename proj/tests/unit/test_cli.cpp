// Copyright 2026 The dml-xdomain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(DML_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dml_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::FILE* f = std::fopen((dir_ / "small.cfg").c_str(), "w");
    std::fputs("users=60\nitems=30\noverlap=12\nratings_per_user=6\nautoencoder_epochs=3\n"
               "embedding_dim=4\nhidden=8,4\n",
               f);
    std::fclose(f);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string d(const std::string& sub = "") const { return (dir_ / sub).string(); }
  fs::path dir_;
};

TEST_F(CliTest, SynthTrainEval) {
  const std::string cfg = " --config " + d("small.cfg");
  auto r = run_cli("synth --seed 1 --out " + d("data") + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(d("data/registry.csv")));
  r = run_cli("train --seed 1 --epochs 3 --out " + d("model") + " --domain-a " + d("data/domain_a") +
              " --domain-b " + d("data/domain_b") + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"rs_a.ckpt", "rs_b.ckpt", "mapping.txt", "history.csv", "train_config.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "model" / f)) << f;
  }
  r = run_cli("eval --seed 1 --out " + d("model") + cfg);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(d("model/metrics.csv")));
}

TEST_F(CliTest, MissingDomainIsInputNotFound) {
  const auto r = run_cli("train --seed 1 --domain-a " + d("nope_a") + " --domain-b " + d("nope_b"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("input-not-found"), std::string::npos) << r.output;
}

TEST_F(CliTest, TrainRequiresSeed) {
  const auto r = run_cli("train --domain-a " + d("a") + " --domain-b " + d("b"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("missing-seed"), std::string::npos) << r.output;
}

TEST_F(CliTest, NmfDemoRefusesLargeAlpha) {
  auto r = run_cli("nmf-demo --seed 0 --alpha 0.6 --out " + d("nmf"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("condition-a-violated"), std::string::npos) << r.output;
  r = run_cli("nmf-demo --seed 0 --alpha 0.3 --out " + d("nmf"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(d("nmf/nmf_history.csv")));
}

TEST_F(CliTest, UnknownSubcommandFails) { EXPECT_NE(run_cli("frobnicate").code, 0); }

}  // namespace
