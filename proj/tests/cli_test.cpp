// Copyright 2026 The simulmt Authors
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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("simulmt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(SIMULMT_CLI) + " " + args + " >" + (dir_ / "stdout").string() + " 2>" +
                            (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, GenCorpusIsDeterministic) {
  ASSERT_EQ(run("gen-corpus --seed 1 --count 30 --out " + path("a.jsonl")), 0);
  ASSERT_EQ(run("gen-corpus --seed 1 --count 30 --out " + path("b.jsonl")), 0);
  EXPECT_EQ(read("a.jsonl"), read("b.jsonl"));
  EXPECT_FALSE(read("a.jsonl").empty());
  ASSERT_EQ(run("gen-corpus --seed 2 --count 30 --out " + path("c.jsonl")), 0);
  EXPECT_NE(read("a.jsonl"), read("c.jsonl"));
}

TEST_F(CliTest, GenCorpusRefusesOverwrite) {
  ASSERT_EQ(run("gen-corpus --count 3 --out " + path("a.jsonl")), 0);
  EXPECT_EQ(run("gen-corpus --count 3 --out " + path("a.jsonl")), 1);
  EXPECT_NE(read("stderr").find("exists"), std::string::npos);
  EXPECT_EQ(run("gen-corpus --count 3 --force --out " + path("a.jsonl")), 0);
}

TEST_F(CliTest, GenCorpusZeroCountWarns) {
  ASSERT_EQ(run("gen-corpus --count 0 --out " + path("a.jsonl")), 0);
  EXPECT_TRUE(fs::exists(path("a.jsonl")));
  EXPECT_EQ(read("a.jsonl"), "");
  EXPECT_NE(read("stderr").find("warning"), std::string::npos);
}

TEST_F(CliTest, InvalidConfigIsUsageError) {
  EXPECT_EQ(run("gen-corpus --vocab 0 --out " + path("a.jsonl")), 1);
  EXPECT_FALSE(read("stderr").empty());
  std::ofstream(path("bad.json")) << "{\"labels\": {\"gamma\": 2.0}}";
  EXPECT_EQ(run("gen-corpus --config " + path("bad.json") + " --out " + path("a.jsonl")), 1);
  std::ofstream(path("broken.json")) << "{not json";
  EXPECT_EQ(run("sweep --config " + path("broken.json")), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("pipeline --out-dir " + path("p") + " --delta 1.5"), 1);
}

TEST_F(CliTest, MissingInputIsDataError) {
  EXPECT_EQ(run("gen-labels --out - --corpus " + path("none.jsonl") + " --model " + path("none.json")), 2);
  EXPECT_EQ(run("report --summary " + path("none.json")), 2);
}

TEST_F(CliTest, FileChain) {
  ASSERT_EQ(run("gen-corpus --count 20 --out " + path("c.jsonl") + " --model-out " + path("m.json")), 0);
  ASSERT_EQ(run("gen-labels --corpus " + path("c.jsonl") + " --model " + path("m.json") + " --out " + path("l.jsonl")), 0);
  ASSERT_EQ(run("train-policy --labels " + path("l.jsonl") + " --model " + path("m.json") + " --out " + path("p.json")), 0);
  auto policy = nlohmann::json::parse(read("p.json"));
  EXPECT_EQ(policy.at("d").get<int>(), 16);
  EXPECT_EQ(policy.at("W").size(), 256u);
  ASSERT_EQ(run("pipeline --corpus " + path("c.jsonl") + " --model " + path("m.json") + " --policy-file " +
                path("p.json") + " --delta 0.5 --out-dir " + path("run")),
            0);
  auto summary = nlohmann::json::parse(read("run/summary.json"));
  EXPECT_EQ(summary.at("n_sentences").get<int>(), 20);
  EXPECT_GE(summary.at("bleu").get<double>(), 98.0);
  for (const char* key : {"al", "al_seconds", "upl_first", "upl_last", "bleu", "n_sentences"})
    EXPECT_TRUE(summary.contains(key)) << key;
  std::istringstream traces(read("run/traces.jsonl"));
  std::string line;
  ASSERT_TRUE(std::getline(traces, line));
  auto rec = nlohmann::json::parse(line);
  for (const char* key : {"i", "token", "g_i", "t_write", "t_source_consumed", "sentence"})
    EXPECT_TRUE(rec.contains(key)) << key;
}

TEST_F(CliTest, SweepDeterministicWithMonotoneCheck) {
  const std::string args = " --count 30 --deltas 0.5 0.75 1.0 --beams 1 3 --check-monotone";
  ASSERT_EQ(run("sweep --out " + path("a.csv") + args), 0);
  ASSERT_EQ(run("sweep --out " + path("b.csv") + args), 0);
  const std::string csv = read("a.csv");
  EXPECT_EQ(csv, read("b.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST_F(CliTest, EmptySweepIsUsageError) {
  std::ofstream(path("cfg.json")) << "{\"sweep\": {\"deltas\": []}}";
  EXPECT_EQ(run("sweep --config " + path("cfg.json")), 1);
  EXPECT_NE(read("stderr").find("sweep"), std::string::npos);
}

TEST_F(CliTest, ReportAveragesSummaries) {
  std::ofstream(path("a.json")) << R"({"al": 2, "al_seconds": 1, "upl_first": 1, "upl_last": 0.5, "bleu": 90, "n_sentences": 10})";
  std::ofstream(path("b.json")) << R"({"al": 4, "al_seconds": 3, "upl_first": 2, "upl_last": 1.5, "bleu": 80, "n_sentences": 10})";
  ASSERT_EQ(run("report --summary " + path("a.json") + " --summary " + path("b.json") + " --out " + path("r.json")), 0);
  auto r = nlohmann::json::parse(read("r.json"));
  EXPECT_DOUBLE_EQ(r.at("al").get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(r.at("bleu").get<double>(), 85.0);
  EXPECT_EQ(r.at("n_sentences").get<int>(), 20);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  std::ofstream(path("cfg.json")) << R"({"seed": 3, "corpus": {"sentence_count": 4}})";
  ASSERT_EQ(run("gen-corpus --config " + path("cfg.json") + " --out " + path("a.jsonl")), 0);
  ASSERT_EQ(run("gen-corpus --config " + path("cfg.json") + " --count 6 --out " + path("b.jsonl")), 0);
  const std::string a = read("a.jsonl"), b = read("b.jsonl");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4);
  EXPECT_EQ(std::count(b.begin(), b.end(), '\n'), 6);
}

}  // namespace
