// Runs the cvqkd binary as a subprocess.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code = -1;
  std::string out;
};

Run cvqkd(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " '" + CVQKD_BIN + "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("cvqkd_cli_") + info->name() + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  fs::path dir_;
};

TEST_F(CliTest, BerCalibration) {
  auto r = cvqkd("ber --base-ber 0.01 --json");
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_NEAR(j["snr_in"].get<double>(), 21.65, 0.005);
  EXPECT_NEAR(j["ber"].get<double>(), 0.01, 1e-12);

  r = cvqkd("ber --base-ber 0.01 --simultaneous --json");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["ber"].get<double>(), 0.05, 0.002);

  r = cvqkd("ber --base-ber 0.05 --loss 0.25 --json");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["ber"].get<double>(), 0.077, 5e-4);
}

TEST_F(CliTest, BerPlainText) {
  const auto r = cvqkd("ber --snr 21.6475777242");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ber            0.01"), std::string::npos) << r.out;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cvqkd("ber --base-ber 0.01 --snr-db 13").code, 2);
  EXPECT_EQ(cvqkd("ber").code, 2);
  EXPECT_EQ(cvqkd("").code, 2);
  EXPECT_EQ(cvqkd("frobnicate").code, 2);
  EXPECT_EQ(cvqkd("simulate --attack optimal --slots 10").code, 2);
  EXPECT_EQ(cvqkd("simulate --attack guess --te 0.1 --slots 10").code, 2);
  EXPECT_EQ(cvqkd("curves fig5").code, 2);
  EXPECT_EQ(cvqkd("--help").code, 0);
}

TEST_F(CliTest, DomainErrors) {
  EXPECT_EQ(cvqkd("ber --base-ber 0.7").code, 4);
  EXPECT_EQ(cvqkd("simulate --attack optimal --te 0.9 --slots 10").code, 4);
  std::ofstream(path("bad.json")) << R"({"base_ber": 0.05, "cutoff_ber": 0.01})";
  EXPECT_EQ(cvqkd("keyrate --config " + path("bad.json")).code, 4);
  std::ofstream(path("garbled.json")) << "{";
  EXPECT_EQ(cvqkd("keyrate --config " + path("garbled.json")).code, 4);
}

TEST_F(CliTest, KeyrateLoss25) {
  const auto r = cvqkd("keyrate --config coherent-loss25.json");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["pa_block_n"].get<int>(), 46);
  EXPECT_NEAR(j["efficiency"].get<double>(), 0.0088, 5e-5);
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  const std::vector<std::string> expected{
      "disclosure_factor", "efficiency",   "eve_ber_bound",
      "eve_ber_post_recon", "eve_mi_final", "pa_block_n",
      "recon_factor",       "sift_factor"};
  EXPECT_EQ(keys, expected);
}

TEST_F(CliTest, KeyrateWritesReportAndManifest) {
  const auto out = path("k/report.json");
  const auto r = cvqkd("keyrate --config coherent-base5 --out " + out);
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(slurp(out));
  EXPECT_EQ(j["pa_block_n"].get<int>(), 14);
  const auto m = json::parse(slurp(out + ".manifest.json"));
  EXPECT_EQ(m["command"], "keyrate");
  EXPECT_EQ(m["tool"], "cvqkd");
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m["options"]["config"]["snr_in"].is_number());
  EXPECT_EQ(cvqkd("replay --check " + out + ".manifest.json").code, 0);
}

TEST_F(CliTest, KeyrateInsecureHalfLoss) {
  const auto r = cvqkd("keyrate --config loss50-insecure.json");
  EXPECT_EQ(r.code, 3);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["status"], "insecure");
  EXPECT_NE(j["reason"].get<std::string>().find("Maurer"), std::string::npos);
}

TEST_F(CliTest, KeyrateMissingConfigIsIoError) {
  EXPECT_EQ(cvqkd("keyrate --config " + path("nope.json")).code, 1);
}

TEST_F(CliTest, SimulateOptimalAttack) {
  const auto out = path("sim.json");
  const auto r = cvqkd(
      "simulate --attack optimal --te 0.08 --slots 1000000 --seed 7 --out " +
      out);
  ASSERT_EQ(r.code, 0);
  const auto s = json::parse(slurp(out))["stats"];
  const double eve = s["empirical_ber_eve"]["value"].get<double>();
  const double se = s["empirical_ber_eve"]["se"].get<double>();
  EXPECT_LE(std::fabs(eve - s["predicted_ber_eve"].get<double>()), 3 * se);
  EXPECT_NEAR(eve, 0.25, 0.01);
  EXPECT_NE(r.out.find("ber_eve"), std::string::npos);
}

TEST_F(CliTest, SimulateIsByteDeterministic) {
  const std::string args =
      "simulate --attack optimal --te 0.08 --slots 200000 --seed 7 "
      "--recon-rounds 20 --pa-n 14 --out ";
  ASSERT_EQ(cvqkd(args + path("a.json") + " --threads 1").code, 0);
  ASSERT_EQ(cvqkd(args + path("b.json") + " --threads 8").code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(CliTest, SimulateTeleportPenaltyProduct) {
  const auto out = path("t.json");
  ASSERT_EQ(cvqkd("simulate --attack teleport --gain 2 --slots 10000 --out " +
                  out)
                .code,
            0);
  const auto s = json::parse(slurp(out))["stats"];
  EXPECT_NEAR(s["penalty_product"].get<double>(), 1.0, 1e-9);
}

TEST_F(CliTest, SimulateSlotsCsv) {
  const auto csv = path("slots.csv");
  ASSERT_EQ(cvqkd("simulate --attack beamsplit --fraction 0.2 --slots 50 "
                  "--slots-csv " + csv)
                .code,
            0);
  const auto text = slurp(csv);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  std::istringstream in(text);
  std::string line;
  int data = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++data;
  }
  EXPECT_EQ(data, 51);  // header + one row per slot
  EXPECT_TRUE(fs::exists(csv + ".manifest.json"));
}

TEST_F(CliTest, CurvesAndReplay) {
  for (const char* fig : {"fig3", "fig4", "fig6"}) {
    ASSERT_EQ(cvqkd(std::string("curves ") + fig + " --out " + dir_.string())
                  .code,
              0);
    const auto csv = dir_ / (std::string(fig) + ".csv");
    const auto manifest = dir_ / (std::string(fig) + ".manifest.json");
    const auto text = slurp(csv);
    ASSERT_FALSE(text.empty());
    EXPECT_EQ(text[0], '#');
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(cvqkd("replay --check " + manifest.string()).code, 0);

    // Tamper, detect, then restore by replaying.
    std::ofstream(csv, std::ios::app) << "0,0\n";
    EXPECT_EQ(cvqkd("replay --check " + manifest.string()).code, 1);
    ASSERT_EQ(cvqkd("replay " + manifest.string()).code, 0);
    EXPECT_EQ(slurp(csv), text);
  }
}

TEST_F(CliTest, Fig3HasTwoColumnPairs) {
  ASSERT_EQ(cvqkd("curves fig3 --grid 10 --out " + dir_.string()).code, 0);
  std::istringstream in(slurp(dir_ / "fig3.csv"));
  std::string line;
  while (std::getline(in, line) && line[0] == '#') {
  }
  EXPECT_EQ(line,
            "t_eve,eve_ber_base0.01,bob_ber_base0.01,eve_ber_base0.05,"
            "bob_ber_base0.05");
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
  ASSERT_EQ(cvqkd("curves fig4 --grid 5", "CVQKD_OUT_DIR='" + dir_.string() + "'")
                .code,
            0);
  EXPECT_TRUE(fs::exists(dir_ / "fig4.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "fig4.manifest.json"));
}

TEST_F(CliTest, UnwritablePath) {
  std::ofstream(path("file")) << "x";
  EXPECT_EQ(cvqkd("curves fig4 --out " + path("file") + "/sub").code, 1);
}

}  // namespace
