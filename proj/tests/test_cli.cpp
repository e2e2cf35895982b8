#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cyclo/iq_io.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cyclo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI with stdout captured to a file; returns the exit status.
  int run(const std::string& args) {
    const std::string cmd = std::string(CYCLO_CLI_PATH) + " " + args + " > " + path("stdout.txt") + " 2> " +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    std::ifstream is(path("stdout.txt"));
    std::stringstream ss;
    ss << is.rdbuf();
    out_ = ss.str();
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
  std::string out_;
};

TEST_F(Cli, GsmCaptureFileClassifiesAsGsm) {
  ASSERT_EQ(run("synth-gsm --slots 200 --oversample 4 --seed 3 --out " + path("g.iq")), 0);
  ASSERT_EQ(run("channel --in " + path("g.iq") + " --snr-db 20 --taps 4 --decay 5 --timing-offset uniform --standard gsm"
                " --seed 4 --out " + path("r.iq")),
            0);
  ASSERT_EQ(run("decimate --in " + path("r.iq") + " --factor 1 --out " + path("d.iq")), 0);
  ASSERT_EQ(run("classify --in " + path("d.iq") + " --pf 0.01 --mode calibrated --profiles gsm,lte"), 0);
  EXPECT_EQ(out_.rfind("profile,statistic,threshold,detected,label\n", 0), 0u);
  EXPECT_NE(out_.find("GSM,"), std::string::npos);
  std::istringstream lines(out_);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line.rfind("profile", 0) != 0) EXPECT_EQ(line.substr(line.rfind(',') + 1), "GSM");
  ASSERT_EQ(run("classify --in " + path("d.iq") + " --format json"), 0);
  EXPECT_NE(out_.find("\"label\":\"GSM\""), std::string::npos);
}

TEST_F(Cli, NoiseOnlyIsDetectionNegative) {
  ASSERT_EQ(run("synth-gsm --slots 40 --seed 1 --out " + path("g.iq")), 0);
  // overwrite with near-silence plus noise via the channel at very low SNR
  ASSERT_EQ(run("channel --in " + path("g.iq") + " --snr-db -40 --seed 2 --out " + path("n.iq")), 0);
  EXPECT_EQ(run("classify --in " + path("n.iq")), 1);
  EXPECT_NE(out_.find(",unknown"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("synth-gsm --slots 2 --out " + path("x.iq")), 2);  // missing --seed
  EXPECT_EQ(run("channel --in a.iq --out b.iq"), 2);
  EXPECT_EQ(run("sweep --standard lte --snr 0 --obs-ms 10 --trials 1 --out " + path("s.csv")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("synth-lte --rb 5 --seed 1 --out " + path("x.iq")), 2);
  EXPECT_EQ(run("decimate --in a.iq --factor 0 --out b.iq"), 2);
}

TEST_F(Cli, FormatErrors) {
  EXPECT_EQ(run("classify --in " + path("missing.iq")), 3);
  std::ofstream(path("bad.iq"), std::ios::binary) << "abc";
  std::ofstream(path("bad.iq.meta")) << "format=cf32le\nsample_rate_hz=1000\n";
  EXPECT_EQ(run("ccf-spectrum --in " + path("bad.iq") + " --out " + path("s.csv")), 3);
}

TEST_F(Cli, SpectrumAndCalibrate) {
  ASSERT_EQ(run("synth-lte --slots 20 --rb 6 --seed 5 --out " + path("l.iq")), 0);
  ASSERT_EQ(run("ccf-spectrum --in " + path("l.iq") + " --tau 0 --max-alpha 20000 --out " + path("s.csv")), 0);
  std::ifstream is(path("s.csv"));
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "alpha_hz,magnitude");
  ASSERT_EQ(run("calibrate --mr 19200 --pf 0.01 --trials 2000"), 0);
  EXPECT_EQ(out_.rfind("m_r,p_f,trials,empirical_threshold,closed_form_threshold\n", 0), 0u);
}

TEST_F(Cli, SweepWritesCsv) {
  ASSERT_EQ(run("sweep --standard lte --snr -5:5:5 --obs-ms 10 --pf 0.01 --trials 4 --seed 1 --out " + path("s.csv")),
            0);
  std::ifstream is(path("s.csv"));
  std::string line;
  int rows = 0;
  std::getline(is, line);
  EXPECT_EQ(line, "snr_db,obs_time_ms,pd,n_trials");
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
