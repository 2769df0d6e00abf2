#include "hricci/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <random>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string output;
};

Result run(const std::string &args) {
  const std::string cmd = std::string(HRICCI_CLI) + " " + args + " 2>&1";
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe)
    return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe))
    out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("hricci_cli_" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string config(const std::string &name) const {
    return std::string("--config ") + HRICCI_CONFIGS + "/" + name + " --out " + dir.string();
  }
  fs::path write(const std::string &name, const std::string &text) const {
    const fs::path p = dir / name;
    hricci::io::write_file_atomic(p, text);
    return p;
  }

  fs::path dir;
};

} // namespace

TEST_F(Cli, SimulateSu2RoundCleanExit) {
  const Result r = run("simulate " + config("su2_round.json"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("reached_t_end"), std::string::npos);
  const auto j = hricci::io::read_json_file(dir / "su2_round_unnormalized.json");
  EXPECT_NEAR(j["samples"].back()["R"].get<double>(), 30.0, 1e-6);
}

TEST_F(Cli, SimulatePastExtinctionIsGuard) {
  const Result r = run("simulate " + config("su2_round.json") + " --t-end 0.3");
  EXPECT_EQ(r.code, 2) << r.output;
}

TEST_F(Cli, MalformedConfigNamesPath) {
  const fs::path p = write("bad.json", R"({"schema": 1, "geometry": {"preset": "sol"},
      "integrator": {"method": "rkf45", "tolerance": 1e-9}})");
  const Result r = run("simulate --config " + p.string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("/integrator/tolerance"), std::string::npos) << r.output;

  const fs::path q = write("broken.json", "{\"schema\": 1,");
  EXPECT_EQ(run("simulate --config " + q.string()).code, 1);
  EXPECT_EQ(run("simulate --config " + (dir / "missing.json").string()).code, 1);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("integrate " + config("su2_round.json")).code, 1);
  EXPECT_EQ(run("simulate").code, 1);
  EXPECT_EQ(run("simulate " + config("su2_round.json") + " --flow kahler").code, 1);
  EXPECT_EQ(run("detect " + config("su2_round.json") + " --offline x.json").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, FlowAndPresetOverrides) {
  const Result r =
      run("simulate " + config("su2_round.json") + " --preset heisenberg --flow normalized --t-end 0.1");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "heisenberg_normalized.json"));
}

TEST_F(Cli, VerifyHeisenbergAllPass) {
  const Result r = run("verify " + config("heisenberg.json"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}

TEST_F(Cli, VerifyEinsteinPreset) {
  const Result r = run("verify " + config("su2_round.json"));
  EXPECT_EQ(r.code, 0) << r.output;
}

TEST_F(Cli, VerifyOfflineCorruptedFails) {
  ASSERT_EQ(run("verify " + config("heisenberg.json")).code, 0);
  const fs::path file = dir / "heisenberg_unnormalized.json";
  EXPECT_EQ(run("verify --offline " + file.string() + " --out " + dir.string()).code, 0);

  auto j = hricci::io::read_json_file(file);
  j["samples"][2000]["R"] = j["samples"][2000]["R"].get<double>() - 1e-3;
  const fs::path bad = write("corrupt.json", hricci::io::dump(j));
  const Result r = run("verify --offline " + bad.string() + " --out " + dir.string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("FAILED invariants:"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("lemma2"), std::string::npos) << r.output;
}

TEST_F(Cli, DetectTables) {
  const Result su2 = run("detect " + config("su2_round.json"));
  EXPECT_EQ(su2.code, 0);
  EXPECT_NE(su2.output.find("einstein"), std::string::npos);
  EXPECT_NE(su2.output.find("shrinking"), std::string::npos);
  const Result heis = run("detect " + config("heisenberg.json"));
  EXPECT_NE(heis.output.find("algebraic-soliton-candidate"), std::string::npos);
  EXPECT_NE(heis.output.find("expanding"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "heisenberg_soliton.json"));
  EXPECT_TRUE(fs::exists(dir / "heisenberg_breather.json"));
}

TEST_F(Cli, SpectrumModels) {
  EXPECT_EQ(run("spectrum " + config("torus.json")).code, 0);
  EXPECT_EQ(run("spectrum " + config("sphere.json")).code, 0);
  const fs::path p = write("t0.json", R"({"schema": 1, "geometry": {"preset": "abelian3"},
      "spectrum": {"model": "torus", "cutoff": 0}})");
  const Result r = run("spectrum --config " + p.string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("cutoff must be >= 1"), std::string::npos) << r.output;
  EXPECT_EQ(run("spectrum " + config("su2_round.json")).code, 1);
}

TEST_F(Cli, SampleConfigsParse) {
  for (const auto &e : fs::directory_iterator(HRICCI_CONFIGS)) {
    const Result r = run("simulate --config " + e.path().string() + " --out " + dir.string() +
                         " --t-end 0.01");
    EXPECT_EQ(r.code, 0) << e.path() << "\n" << r.output;
  }
}
