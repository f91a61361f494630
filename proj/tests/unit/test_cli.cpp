// Copyright 2026 The sphericam Authors
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
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sphericam/sim_dump.hpp"
#include "sphericam/wav.hpp"

using namespace sphericam;
namespace fs = std::filesystem;

namespace {

struct Run {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / ("sphericam_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = env + " \"" SPHERICAM_CLI_PATH "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in), {});
  fs::remove(log);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sphericam_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Static single-source scene rendered once per test.
  void simulate_static() {
    const auto r = run("simulate " + q(fs::path(SPHERICAM_EXAMPLES_DIR) / "static_source.json") + " -o " +
                       q(dir_ / "sim"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
  }

  fs::path dir_;
};

std::vector<std::string> files_in(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_F(CliTest, SimulateLocalizeEvaluateStaticScene) {
  simulate_static();
  EXPECT_EQ(files_in(dir_ / "sim"), (std::vector<std::string>{"annotations.csv", "audio.wav"}));
  const auto loc = run("localize " + q(dir_ / "sim/audio.wav") + " -o " + q(dir_ / "pred.csv"));
  ASSERT_EQ(loc.exit_code, 0) << loc.output;
  EXPECT_EQ(slurp(dir_ / "pred.csv").substr(0, 53), "frame,source_id,azimuth_deg,elevation_deg,confidence\n");
  const auto ev = run("evaluate " + q(dir_ / "pred.csv") + " " + q(dir_ / "sim/annotations.csv") + " -o " +
                      q(dir_ / "report.json"));
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  EXPECT_NE(ev.output.find("localization_recall_pct: 100.000000"), std::string::npos) << ev.output;
  EXPECT_NE(slurp(dir_ / "report.json").find("\"localization_recall_pct\": 100.0"), std::string::npos);
}

TEST_F(CliTest, EvaluateAgainstItself) {
  simulate_static();
  const auto gt = q(dir_ / "sim/annotations.csv");
  const auto ev = run("evaluate " + gt + " " + gt);
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  EXPECT_NE(ev.output.find("localization_error_deg: 0.000000"), std::string::npos) << ev.output;
  EXPECT_NE(ev.output.find("localization_recall_pct: 100.000000"), std::string::npos) << ev.output;
}

TEST_F(CliTest, SubFrameInputGivesEmptyDump) {
  Audio a;
  a.sample_rate = 24000.0;
  a.samples = Eigen::MatrixXd::Random(32, 1200) * 0.1;
  write_wav_float(dir_ / "short.wav", a);
  const auto r = run("image " + q(dir_ / "short.wav") + " -o " + q(dir_ / "short.simd"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto dump = read_sim_dump(dir_ / "short.simd");
  EXPECT_TRUE(dump.frames.empty());
  EXPECT_EQ(dump.bands, 9u);
  EXPECT_EQ(dump.pixels, 242u);
}

TEST_F(CliTest, ImageWithRenderWritesOnePgmPerFrame) {
  simulate_static();
  const auto r = run("image " + q(dir_ / "sim/audio.wav") + " -o " + q(dir_ / "maps.simd") +
                     " --render --width 120 --annotations " + q(dir_ / "sim/annotations.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto files = files_in(dir_);
  EXPECT_EQ(std::count_if(files.begin(), files.end(),
                          [](const std::string& f) { return f.ends_with(".pgm"); }),
            20);
  EXPECT_TRUE(fs::exists(dir_ / "maps.frame00000.pgm"));
  EXPECT_TRUE(fs::exists(dir_ / "maps.frame00019.pgm"));
  EXPECT_EQ(slurp(dir_ / "maps.frame00003.pgm").substr(0, 13), "P5\n120 60\n255");
  EXPECT_EQ(read_sim_dump(dir_ / "maps.simd").frames.size(), 20u);
}

TEST_F(CliTest, OutputsAreDeterministicAcrossThreadCounts) {
  simulate_static();
  const auto wav = q(dir_ / "sim/audio.wav");
  ASSERT_EQ(run("--threads 1 localize " + wav + " -o " + q(dir_ / "a.csv")).exit_code, 0);
  ASSERT_EQ(run("localize " + wav + " -o " + q(dir_ / "b.csv"), "SPHERICAM_THREADS=3").exit_code, 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  const auto again = run("simulate " + q(fs::path(SPHERICAM_EXAMPLES_DIR) / "static_source.json") + " -o " +
                         q(dir_ / "sim2"));
  ASSERT_EQ(again.exit_code, 0);
  EXPECT_EQ(slurp(dir_ / "sim/audio.wav"), slurp(dir_ / "sim2/audio.wav"));
}

TEST_F(CliTest, SeedOverrideChangesAudio) {
  simulate_static();
  const auto scene = q(fs::path(SPHERICAM_EXAMPLES_DIR) / "static_source.json");
  ASSERT_EQ(run("--seed 99 simulate " + scene + " -o " + q(dir_ / "s99")).exit_code, 0);
  EXPECT_NE(slurp(dir_ / "sim/audio.wav"), slurp(dir_ / "s99/audio.wav"));
}

TEST_F(CliTest, ConfigSuppliesPaths) {
  simulate_static();
  {
    std::ofstream cfg(dir_ / "run.cfg");
    cfg << "input = " << (dir_ / "sim/audio.wav").string() << "\noutput = " << (dir_ / "cfg.csv").string()
        << "\nthreshold_deg = 10\n";
  }
  const auto r = run("--config " + q(dir_ / "run.cfg") + " localize");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "cfg.csv"));
  const auto ev = run("--config " + q(dir_ / "run.cfg") + " evaluate " + q(dir_ / "cfg.csv") + " " +
                      q(dir_ / "sim/annotations.csv"));
  EXPECT_NE(ev.output.find("threshold_deg: 10"), std::string::npos) << ev.output;
}

TEST_F(CliTest, FailuresNameStageAndLeaveNoFiles) {
  Audio a;
  a.sample_rate = 24000.0;
  a.samples = Eigen::MatrixXd::Random(5, 4800) * 0.1;
  write_wav_float(dir_ / "five.wav", a);
  const auto r = run("localize " + q(dir_ / "five.wav") + " -o " + q(dir_ / "pred.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("sphericam: sigproc stage failed"), std::string::npos) << r.output;
  EXPECT_EQ(files_in(dir_), std::vector<std::string>{"five.wav"});

  const auto missing = run("image " + q(dir_ / "nope.wav") + " -o " + q(dir_ / "x.simd"));
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_NE(missing.output.find("io stage failed"), std::string::npos) << missing.output;
  EXPECT_EQ(files_in(dir_), std::vector<std::string>{"five.wav"});

  {
    std::ofstream cfg(dir_ / "bad.cfg");
    cfg << "bands = lots\n";
  }
  const auto bad = run("--config " + q(dir_ / "bad.cfg") + " localize " + q(dir_ / "five.wav"));
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.output.find("config stage failed"), std::string::npos) << bad.output;

  const auto no_out = run("localize " + q(dir_ / "five.wav"));
  EXPECT_EQ(no_out.exit_code, 1);
  EXPECT_NE(no_out.output.find("no output given"), std::string::npos) << no_out.output;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_NE(run("").exit_code, 0);
  EXPECT_NE(run("frobnicate").exit_code, 0);
  EXPECT_EQ(run("--help").exit_code, 0);
  EXPECT_NE(run("evaluate only_one.csv").exit_code, 0);
}
