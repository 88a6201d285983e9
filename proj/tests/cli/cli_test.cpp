/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

Result msnet(const std::string& args) {
  Result r;
  FILE* pipe = popen((std::string(MSNET_CLI_PATH) + " " + args + " 2>&1").c_str(), "r");
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("msnet_cli_" + std::to_string(getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void make_corpus(int records) {
    ASSERT_EQ(msnet("synth --records " + std::to_string(records) + " --seed 3 --out " +
                    path("train.tsv") + " --vocab-out " + path("vocab.txt")).status, 0);
    ASSERT_EQ(msnet("synth --records 20 --seed 4 --id-prefix test --out " + path("test.tsv")).status, 0);
    ASSERT_EQ(msnet("embed-toy --train-tsv " + path("train.tsv") + " --test-tsv " +
                    path("test.tsv") + " --vocab " + path("vocab.txt") +
                    " --layers 2 --hidden 8 --out " + path("emb.mseb")).status, 0);
  }

  std::string data_flags() const {
    return "--train-tsv " + path("train.tsv") + " --test-tsv " + path("test.tsv") +
           " --vocab " + path("vocab.txt") + " --embeddings " + path("emb.mseb");
  }

  fs::path dir_;
};

TEST_F(CliTest, UniformPredictionsScoreLnThree) {
  make_corpus(30);
  std::ifstream tsv(path("train.tsv"));
  std::string line;
  std::getline(tsv, line);
  std::ofstream csv(path("uniform.csv"));
  csv << "ID,A,B,NEITHER\n";
  while (std::getline(tsv, line)) {
    csv << line.substr(0, line.find('\t')) << ",0.3333333333333333,0.3333333333333333,0.3333333333333334\n";
  }
  csv.close();
  const Result r = msnet("eval --pred " + path("uniform.csv") + " --gold " + path("train.tsv"));
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("1.098612"), std::string::npos) << r.output;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(msnet("--help").status, 0);
  EXPECT_EQ(msnet("").status, 1);
  EXPECT_EQ(msnet("cv --no-such-flag").status, 1);
  EXPECT_EQ(msnet("eval --pred " + path("absent.csv") + " --gold " + path("absent.tsv")).status, 2);

  std::ofstream(path("bad.tsv")) << "ID\tText\n1\thello\n";
  std::ofstream(path("p.csv")) << "ID,A,B,NEITHER\n";
  const Result bad = msnet("eval --pred " + path("p.csv") + " --gold " + path("bad.tsv"));
  EXPECT_EQ(bad.status, 1) << bad.output;
  EXPECT_NE(bad.output.find("header lacks column"), std::string::npos) << bad.output;
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
  make_corpus(30);
  std::ofstream(path("cfg.json")) << R"({"model": {"layers": 2, "colour": "red"}})";
  const Result r = msnet("cv " + data_flags() + " --config " + path("cfg.json") + " --out " + path("run"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("colour"), std::string::npos) << r.output;
}

TEST_F(CliTest, GradcheckReportsBreakdown) {
  const Result r = msnet("gradcheck --span meanpool --seed 0");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("span=meanpool"), std::string::npos);
  EXPECT_NE(r.output.find("without b_sim max_rel_error="), std::string::npos);
  EXPECT_NE(r.output.find("tolerance=1e-04 PASS"), std::string::npos) << r.output;
}

TEST_F(CliTest, CvManifestReproducesRun) {
  make_corpus(80);
  const Result first = msnet("cv " + data_flags() + " --layers 2 --sdim 3 --epochs 2 --k 3 --out " + path("a"));
  ASSERT_EQ(first.status, 0) << first.output;
  for (const char* f : {"cv_report.json", "manifest.json", "test_predictions.csv",
                        "fold-1.msck", "fold-2.msck", "fold-3.msck"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  }
  const auto report = nlohmann::json::parse(slurp(dir_ / "a" / "cv_report.json"));
  EXPECT_EQ(report["k"], 3);
  EXPECT_EQ(report["folds"].size(), 3u);

  const Result again = msnet("cv --from-manifest " + path("a/manifest.json") + " --out " + path("b"));
  ASSERT_EQ(again.status, 0) << again.output;
  EXPECT_EQ(slurp(dir_ / "a" / "cv_report.json"), slurp(dir_ / "b" / "cv_report.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "fold-2.msck"), slurp(dir_ / "b" / "fold-2.msck"));

  const Result predicted = msnet("predict " + data_flags() + " --model " + path("a/fold-1.msck") +
                                 " --model " + path("a/fold-2.msck") + " --model " +
                                 path("a/fold-3.msck") + " --out " + path("pred.csv"));
  ASSERT_EQ(predicted.status, 0) << predicted.output;
  EXPECT_EQ(slurp(dir_ / "pred.csv"), slurp(dir_ / "a" / "test_predictions.csv"));
}

TEST_F(CliTest, ManifestDigestMismatchFails) {
  make_corpus(40);
  ASSERT_EQ(msnet("cv " + data_flags() + " --layers 2 --sdim 3 --epochs 1 --k 2 --out " + path("a")).status, 0);
  std::ofstream(path("train.tsv"), std::ios::app) << "\n";
  const Result r = msnet("cv --from-manifest " + path("a/manifest.json") + " --out " + path("b"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("changed since the recorded run"), std::string::npos) << r.output;
}

}  // namespace
