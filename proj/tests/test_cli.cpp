#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("noisevar_cli_" + std::string(
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CmdResult run(const std::string& args) {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + NOISEVAR_CLI_PATH + "\" " + args + " >\"" + out.string() +
                            "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateWritesCsvAndSidecar) {
  const auto csv = path("ik.csv");
  auto r = run("generate --system ikeda --n 2000 --seed 7 --out " + csv);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("x,y\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2001);
  auto side = nlohmann::json::parse(slurp(csv + ".json"));
  EXPECT_EQ(side["generator"]["system"], "ikeda");
  EXPECT_EQ(side["generator"]["seed"], 7);
  EXPECT_EQ(side["generator"]["n"], 2000);
}

TEST_F(Cli, GenerateParamsAndModes) {
  auto r = run("generate --system lorenz --n 50 --noise 0.1 --noise-mode iterative --param r=28 --out " +
               path("l.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto side = nlohmann::json::parse(slurp(path("l.csv.json")));
  EXPECT_EQ(side["generator"]["r"].get<double>(), 28.0);
  EXPECT_EQ(side["generator"]["noise_mode"], "iterative");
  EXPECT_EQ(run("generate --system henon --param bogus=1 --out " + path("h.csv")).code, 1);
  EXPECT_EQ(run("generate --system rossler --out " + path("r.csv")).code, 1);
  EXPECT_EQ(run("generate --system ikeda --noise-mode sideways --out " + path("i.csv")).code, 1);
}

TEST_F(Cli, AnalyzeTextReport) {
  ASSERT_EQ(run("generate --system ikeda --n 2001 --out " + path("ik.csv")).code, 0);
  auto r = run("analyze " + path("ik.csv") + " --target x --vars \"x@1,y@1\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fractional error (LR)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("fractional error (NL)"), std::string::npos);
  EXPECT_NE(r.out.find("(nonlinear)"), std::string::npos);
}

TEST_F(Cli, AnalyzeJsonAndPrecision) {
  ASSERT_EQ(run("generate --system ikeda --n 800 --out " + path("ik.csv")).code, 0);
  auto r = run("analyze " + path("ik.csv") + " --target x --vars x@1 --json --out " + path("rep.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["run_config"]["subcommand"], "analyze");
  EXPECT_EQ(j["run_config"]["options"]["min_count"], 50);
  const double v = j["nl"]["sigma_fractional"].get<double>();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  EXPECT_EQ(std::stod(buf), v);
  EXPECT_TRUE(fs::exists(path("rep.json.config.json")) || fs::exists(path("rep.config.json")));

  auto full = run("analyze " + path("ik.csv") + " --target x --vars x@1 --json --full-precision");
  ASSERT_EQ(full.code, 0) << full.err;
  const double vf = nlohmann::json::parse(full.out)["nl"]["sigma_fractional"].get<double>();
  EXPECT_NEAR(vf, v, 1e-3 * v);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  ASSERT_EQ(run("generate --system ikeda --n 1000 --noise 0.01 --seed 3 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run("generate --system ikeda --n 1000 --noise 0.01 --seed 3 --out " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  auto r1 = run("analyze " + path("a.csv") + " --target x --vars x@1,y@1 --json --workers 1");
  auto r2 = run("analyze " + path("a.csv") + " --target x --vars x@1,y@1 --json --workers 1");
  ASSERT_EQ(r1.code, 0);
  EXPECT_EQ(r1.out, r2.out);
  auto c1 = run("curve " + path("a.csv") + " --target x --vars x@1,y@1 --workers 1");
  auto c2 = run("curve " + path("a.csv") + " --target x --vars x@1,y@1 --workers 4");
  ASSERT_EQ(c1.code, 0);
  EXPECT_EQ(c1.out, c2.out);
}

TEST_F(Cli, CurveAndFitErfCsv) {
  ASSERT_EQ(run("generate --system ikeda --n 1000 --noise 0.02 --out " + path("ik.csv")).code, 0);
  auto r = run("curve " + path("ik.csv") + " --target x --vars x@1,y@1 --out " + path("cp.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("cp.csv")).rfind("eps,delta,p,stderr,n_pairs\n", 0), 0u);
  EXPECT_TRUE(fs::exists(path("cp.csv.config.json")) || fs::exists(path("cp.config.json")));
  auto e = run("fit-erf " + path("ik.csv") + " --target x --vars x@1,y@1");
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out.rfind("eps,p_data,p_fit\n", 0), 0u);
}

TEST_F(Cli, ScanLagsAndSubsets) {
  ASSERT_EQ(run("generate --system ikeda --n 2001 --out " + path("ik.csv")).code, 0);
  auto r = run("scan " + path("ik.csv") + " --target x --lags-up-to 5 --json");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["rows"].size(), 6u);
  EXPECT_EQ(j["chosen_dE"], 5);

  std::ofstream(path("subsets.json")) << R"({"subsets": ["none", ["x@1"], "x@1,y@1"]})";
  auto s = run("scan " + path("ik.csv") + " --target x --subsets " + path("subsets.json"));
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("{none}"), std::string::npos) << s.out;
  EXPECT_NE(s.out.find("{x@1, y@1}"), std::string::npos);

  EXPECT_EQ(run("scan " + path("ik.csv") + " --target x").code, 1);
}

TEST_F(Cli, ErrorContracts) {
  auto missing = run("analyze " + path("nope.csv") + " --target x --vars x@1");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find(path("nope.csv")), std::string::npos) << missing.err;

  auto unknown = run("frobnicate");
  EXPECT_EQ(unknown.code, 1);
  EXPECT_FALSE(unknown.err.empty());
  auto flag = run("analyze x.csv --target x --bogus");
  EXPECT_EQ(flag.code, 1);
  EXPECT_NE(flag.err.find("bogus"), std::string::npos);

  std::ofstream(path("bad.csv")) << "x,y\n1,2\n3,NaN\n";
  auto bad = run("analyze " + path("bad.csv") + " --target x --vars y");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("row 3"), std::string::npos) << bad.err;

  ASSERT_EQ(run("generate --system henon --n 100 --out " + path("h.csv")).code, 0);
  EXPECT_EQ(run("analyze " + path("h.csv") + " --target x --vars q@1").code, 1);
  EXPECT_EQ(run("analyze " + path("h.csv") + " --target x --vars x@1 --min-count 100000").code, 2);
}
