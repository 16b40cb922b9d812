#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "eolgp/cli.hpp"
#include "eolgp/io.hpp"

namespace eolgp {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("eolgp_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(std::vector<std::string> args) const {
    args.insert(args.begin(), "eolgp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"pretest", "x"}).code, 1);
  EXPECT_EQ(run({"fit", "--out", path(""), "--kernel", "laplace"}).code, 1);
}

TEST_F(Cli, GenerateIsDeterministic) {
  const CliRun a = run({"generate", "--out", path("a"), "--seed", "3", "--traces"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("100 rows"), std::string::npos) << a.out;
  ASSERT_EQ(run({"generate", "--out", path("b"), "--seed", "3"}).code, 0);
  const std::string csv = io::read_text_file(path("a/dataset.csv"));
  EXPECT_EQ(csv, io::read_text_file(path("b/dataset.csv")));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 101);
  EXPECT_EQ(std::distance(fs::directory_iterator(path("a/traces")), fs::directory_iterator{}), 100);
}

TEST_F(Cli, GenerateFailsWhenNoCellReachesEndOfLife) {
  const CliRun r = run({"generate", "--out", path(""), "--max-cycles", "10"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("C"), std::string::npos);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  io::write_text_file(path("cfg.json"), R"({"max_cycles": 10, "out": ")" + path("cfgout") + R"("})");
  EXPECT_EQ(run({"generate", "--config", path("cfg.json")}).code, 2);
  EXPECT_EQ(run({"generate", "--config", path("cfg.json"), "--max-cycles", "20000"}).code, 0);
  EXPECT_TRUE(fs::exists(path("cfgout/dataset.csv")));
  io::write_text_file(path("typo.json"), R"({"max_cylces": 10})");
  EXPECT_EQ(run({"generate", "--config", path("typo.json"), "--out", path("")}).code, 2);
}

TEST_F(Cli, MalformedCsvReportsLine) {
  io::write_text_file(path("bad.csv"), "c_rate,t_amb_c,dod_pct,eol_cycles\n1,25,60,300\n1,25,sixty,300\n");
  const CliRun r = run({"fit", "--data", path("bad.csv"), "--out", path("")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3"), std::string::npos) << r.err;
  EXPECT_EQ(run({"fit", "--data", path("missing.csv"), "--out", path("")}).code, 2);
}

class CliRoundTrip : public Cli {
 protected:
  void SetUp() override {
    Cli::SetUp();
    ASSERT_EQ(run({"generate", "--out", path("")}).code, 0);
    train_ = io::read_dataset_csv(fs::path(path("dataset.csv")));
    std::ostringstream q;
    q << "c_rate,t_amb_c,dod_pct\n";
    for (const auto& r : train_.rows) {
      q << io::format_double(r.condition.c_rate) << ',' << io::format_celsius(r.condition.t_amb) << ','
        << io::format_double(r.condition.dod) << '\n';
    }
    io::write_text_file(path("query.csv"), q.str());
  }

  // Posterior means at the training conditions.
  std::vector<double> predict_train() const {
    const CliRun p = run({"predict", "--model", path("model.json"), "--query", path("query.csv"), "--out", path("")});
    EXPECT_EQ(p.code, 0) << p.err;
    EXPECT_TRUE(p.err.empty()) << p.err;
    std::ifstream in(path("predictions.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "c_rate,t_amb_c,dod_pct,mean,std,ci95_low,ci95_high,extrapolation");
    std::vector<double> mean;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
      EXPECT_EQ(cells.size(), 8u);
      mean.push_back(io::parse_double(cells[3], "mean"));
      EXPECT_EQ(cells[7], "0");
    }
    return mean;
  }

  Dataset train_;
};

TEST_F(CliRoundTrip, TrainingRmseBelowNoiseLevel) {
  ASSERT_EQ(run({"fit", "--data", path("dataset.csv"), "--out", path(""), "--kernel", "rbf", "--optimize"}).code, 0);
  const auto mean = predict_train();
  ASSERT_EQ(mean.size(), train_.size());
  double se = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) se += (mean[i] - train_.rows[i].eol) * (mean[i] - train_.rows[i].eol);
  EXPECT_LT(std::sqrt(se / static_cast<double>(mean.size())), 1.0);
}

TEST_F(CliRoundTrip, NearNoiselessModelInterpolates) {
  io::write_text_file(path("kernel.json"), R"({"kind":"rbf","rbf":{"noise":0.01}})");
  ASSERT_EQ(run({"fit", "--data", path("dataset.csv"), "--out", path(""), "--kernel-file", path("kernel.json"),
                 "--optimize"}).code, 0);
  const auto mean = predict_train();
  ASSERT_EQ(mean.size(), train_.size());
  for (std::size_t i = 0; i < mean.size(); ++i) EXPECT_NEAR(mean[i], train_.rows[i].eol, 1.0) << i;
}

TEST_F(Cli, FarQueryIsFlaggedAsExtrapolation) {
  ASSERT_EQ(run({"generate", "--out", path("")}).code, 0);
  ASSERT_EQ(run({"fit", "--data", path("dataset.csv"), "--out", path("")}).code, 0);
  const CliRun p = run({"predict", "--model", path("model.json"), "--c-rate", "5", "--t-amb", "25", "--dod", "60",
                     "--out", path("")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.err.find("extrapolation"), std::string::npos);
  const std::string csv = io::read_text_file(path("predictions.csv"));
  EXPECT_EQ(csv.substr(csv.size() - 2), "1\n");
}

TEST_F(Cli, PretestWritesReports) {
  const CliRun r = run({"pretest", "c", "--out", path("")});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const char* f : {"pretest_c.json", "pretest_c_holdouts.csv", "pretest_c_alignment.csv"}) {
    EXPECT_TRUE(fs::exists(path(f))) << f;
  }
  EXPECT_NO_THROW((void)io::read_json_file(path("pretest_c.json")));
}

TEST_F(Cli, AblationWithoutTuning) {
  ASSERT_EQ(run({"generate", "--out", path("")}).code, 0);
  const CliRun r = run({"ablation", "--data", path("dataset.csv"), "--no-tune", "--out", path("")});
  EXPECT_TRUE(r.code == 0 || r.code == 4) << r.err;
  for (const char* f : {"ablation.json", "ablation.csv", "ablation_breakdown.csv"}) {
    EXPECT_TRUE(fs::exists(path(f))) << f;
  }
}

}  // namespace
}  // namespace eolgp
