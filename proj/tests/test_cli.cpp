#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int rc = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(HOMCHAIN_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string example(const std::string& name) { return std::string(HOMCHAIN_EXAMPLES_DIR) + "/" + name + ".json"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("homchain_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write_config(const std::string& text) {
    const auto p = dir / "config.json";
    std::ofstream(p) << text;
    return p.string();
  }

  std::string base(const std::string& config) { return "--config " + config + " --out " + dir.string(); }

  fs::path dir;
};

const char* kSmallUniform = R"({
  "schema": "homchain/1",
  "name": "small",
  "distribution": {"kind": "iid_uniform_box", "box": {"delta": [1, 2], "epsilon": [3, 4]}},
  "seed": 4,
  "z_grid": [-0.5, 0, 0.8, 1.2, 2],
  "schedule": [20, 40],
  "samples": 3
})";

} // namespace

TEST_F(Cli, TabulateWritesInfRowAndIsReproducible) {
  const auto r = run(base(example("deterministic")) + " tabulate");
  ASSERT_EQ(r.rc, 0) << r.out;
  const auto csv = slurp(dir / "deterministic_table.csv");
  EXPECT_EQ(csv.rfind("# config_hash: ", 0), 0u);
  EXPECT_NE(csv.find("\n-1,inf,0\n"), std::string::npos);
  EXPECT_NE(csv.find("\n2,-1,0\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "deterministic_table_meta.json"));
  ASSERT_EQ(run(base(example("deterministic")) + " tabulate").rc, 0);
  EXPECT_EQ(slurp(dir / "deterministic_table.csv"), csv);
}

TEST_F(Cli, ThreadCountDoesNotChangeResults) {
  const auto cfg = write_config(kSmallUniform);
  ASSERT_EQ(run(base(cfg) + " --jobs 1 tabulate").rc, 0);
  const auto one = slurp(dir / "small_table.csv");
  ASSERT_EQ(run(base(cfg) + " --jobs 4 tabulate").rc, 0);
  EXPECT_EQ(slurp(dir / "small_table.csv"), one);
}

TEST_F(Cli, SeedOverrideChangesRealization) {
  const auto cfg = write_config(kSmallUniform);
  ASSERT_EQ(run(base(cfg) + " tabulate").rc, 0);
  const auto a = slurp(dir / "small_table.csv");
  ASSERT_EQ(run(base(cfg) + " --seed 99 tabulate").rc, 0);
  EXPECT_NE(slurp(dir / "small_table.csv"), a);
}

TEST_F(Cli, ConvergeWritesBothTraces) {
  const auto r = run(base(example("deterministic")) + " converge");
  ASSERT_EQ(r.rc, 0) << r.out;
  EXPECT_NE(r.out.find("monotone=yes"), std::string::npos);
  const auto byN = slurp(dir / "deterministic_trace_by_N.csv");
  EXPECT_NE(byN.find("level,N,mean,stderr,samples"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "deterministic_trace_by_L.csv"));
}

TEST_F(Cli, MinimizeWritesDeformations) {
  const auto r = run(base(example("deterministic")) + " --diagnostics minimize");
  ASSERT_EQ(r.rc, 0) << r.out;
  for (int n : {250, 500, 1000, 2000}) EXPECT_TRUE(fs::exists(dir / ("deterministic_deformation_n" + std::to_string(n) + ".csv")));
  const auto u = slurp(dir / "deterministic_deformation_n250.csv");
  EXPECT_NE(u.find("\n250,1,3\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "deterministic_minimize_diagnostics.json"));
}

TEST_F(Cli, OracleCorpusPasses) {
  const auto r = run(base(example("deterministic")) + " oracle");
  ASSERT_EQ(r.rc, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  std::size_t passes = 0;
  for (std::size_t p = r.out.find("PASS"); p != std::string::npos; p = r.out.find("PASS", p + 1)) ++passes;
  EXPECT_GE(passes, 24u);
}

TEST_F(Cli, VerifyPassesOnDeterministicMedium) {
  const auto r = run(base(example("deterministic")) + " verify");
  EXPECT_EQ(r.rc, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST_F(Cli, VerifyFlagsNonStationaryMedium) {
  const auto r = run(base(example("nonstationary_fixture")) + " verify");
  EXPECT_EQ(r.rc, 2) << r.out;
  EXPECT_NE(r.out.find("FAIL  stationarity"), std::string::npos) << r.out;
}

TEST_F(Cli, VerifyFlagsPlantedNonConvexTable) {
  const auto r = run(base(example("nonconvex_table")) + " verify");
  EXPECT_EQ(r.rc, 2) << r.out;
  EXPECT_NE(r.out.find("FAIL  structure.convexity"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS  structure.monotone_decrease"), std::string::npos) << r.out;
}

TEST_F(Cli, InvalidConfigIsUsageError) {
  const auto cfg = write_config(R"({"schema": "homchain/1", "distribution": {"kind": "iid_uniform_box",
      "box": {"delta": [1, 2], "epsilon": [3, 4]}}, "sampels": 3})");
  const auto r = run(base(cfg) + " tabulate");
  EXPECT_EQ(r.rc, 1);
  EXPECT_NE(r.out.find("sampels"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("tabulate").rc, 1);
  EXPECT_EQ(run("--config /nonexistent.json tabulate").rc, 1);
  EXPECT_EQ(run(base(example("deterministic"))).rc, 1);
  EXPECT_EQ(run(base(example("deterministic")) + " frobnicate").rc, 1);
}

TEST_F(Cli, MissingGridIsValidationError) {
  const auto cfg = write_config(R"({"schema": "homchain/1", "distribution": {"kind": "iid_uniform_box",
      "box": {"delta": [1, 2], "epsilon": [3, 4]}}})");
  EXPECT_EQ(run(base(cfg) + " tabulate").rc, 1);
}
