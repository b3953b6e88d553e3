#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ajc/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ajc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ajc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ajc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(Cli, AssembleTripleWell) {
  const auto dir = scratch("assemble");
  const auto r = run({"assemble", "--preset", "triple-well", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("nnz 4620"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("dimension 378"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "jump_matrix.mtx"));
  EXPECT_TRUE(fs::exists(dir / "jump_matrix.json"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"assemble"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto dir = scratch("codes");
  write_text(dir / "empty.json", "{}");
  EXPECT_EQ(run({"assemble", "--config", (dir / "empty.json").string()}).code, 1);
  write_text(dir / "bad.json", R"({"problem": {"preset": "nine-state"}})");
  EXPECT_EQ(run({"assemble", "--config", (dir / "bad.json").string()}).code, 2);
  EXPECT_EQ(run({"assemble", "--config", (dir / "absent.json").string()}).code, 2);
  write_text(dir / "nc.json", R"({"problem": {"preset": "triple-well"},
    "propagate": {"method": "series"}, "solver": {"activity_max_terms": 3}})");
  EXPECT_EQ(run({"propagate", "--config", (dir / "nc.json").string(), "--out", dir.string()}).code, 3);
  write_text(dir / "noa.json", R"({"problem": {"preset": "two-state"}, "committor": {"A": []}})");
  EXPECT_EQ(run({"committor", "--config", (dir / "noa.json").string(), "--out", dir.string()}).code, 2);
}

TEST(Cli, KoopmanOfOneIsOne) {
  const auto dir = scratch("koopman");
  write_text(dir / "k.json", R"({"problem": {"preset": "two-state"}, "koopman": {"observable": 1.0}})");
  ASSERT_EQ(run({"koopman", "--config", (dir / "k.json").string(), "--out", dir.string()}).code, 0);
  std::istringstream csv(slurp(dir / "koopman.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "state,block,koopman");
  int rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1") << line;
    ++rows;
  }
  EXPECT_EQ(rows, 16);
}

TEST(Cli, PropagateTwoState) {
  const auto dir = scratch("propagate");
  const auto r = run({"propagate", "--preset", "two-state", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir / "density.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "state,block,density");
  EXPECT_TRUE(fs::exists(dir / "activity.csv"));
}

TEST(Cli, OutputsAreReproducibleAcrossRunsAndThreads) {
  const auto dir = scratch("repro");
  write_text(dir / "c.json", R"({
    "problem": {"preset": "two-state"},
    "sample": {"trajectories": 50, "first_jump": {"state": 0, "block": 1, "samples": 20000}},
    "committor": {"A": {"states": [1], "blocks": [3, 3]}},
    "coherence": {"C": {"states": [0], "blocks": [4, 7]}}
  })");
  const auto cfg = (dir / "c.json").string();
  for (const char* cmd : {"sample", "propagate", "koopman", "committor", "coherence", "assemble"}) {
    const auto a = dir / (std::string(cmd) + "_a"), b = dir / (std::string(cmd) + "_b");
    ASSERT_EQ(run({cmd, "--config", cfg, "--out", a.string(), "--seed", "5", "--threads", "1"}).code, 0) << cmd;
    ASSERT_EQ(run({cmd, "--config", cfg, "--out", b.string(), "--seed", "5", "--threads", "3"}).code, 0) << cmd;
    for (const auto& entry : fs::directory_iterator(a))
      EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << cmd << " " << entry.path();
  }
  const auto c = dir / "sample_c";
  ASSERT_EQ(run({"sample", "--config", cfg, "--out", c.string(), "--seed", "6"}).code, 0);
  EXPECT_NE(slurp(c / "trajectories.csv"), slurp(dir / "sample_a" / "trajectories.csv"));
}

TEST(Cli, CoherenceSurvivalFlag) {
  const auto dir = scratch("coherence");
  write_text(dir / "c.json", R"({"problem": {"preset": "two-state"}, "coherence": {"C": {"states": [0], "blocks": [4, 7]}}})");
  const auto cfg = (dir / "c.json").string();
  const auto plain = run({"coherence", "--config", cfg, "--out", dir.string()});
  const auto counted = run({"coherence", "--config", cfg, "--out", dir.string(), "--count-survival"});
  EXPECT_NE(plain.out.find("coherent no"), std::string::npos) << plain.out;
  EXPECT_NE(counted.out.find("coherent yes"), std::string::npos) << counted.out;
}

TEST(Cli, CommittorTailFlag) {
  const auto dir = scratch("tail");
  write_text(dir / "c.json", R"({"problem": {"preset": "two-state"}, "committor": {"A": [[1, 2]]}})");
  const auto cfg = (dir / "c.json").string();
  EXPECT_EQ(run({"committor", "--config", cfg, "--out", dir.string(), "--tail", "absorb_to_a"}).code, 0);
  EXPECT_EQ(run({"committor", "--config", cfg, "--out", dir.string(), "--tail", "0.3"}).code, 0);
  EXPECT_EQ(run({"committor", "--config", cfg, "--out", dir.string(), "--tail", "sideways"}).code, 1);
}

TEST(Cli, ConvergenceWritesSlope) {
  const auto dir = scratch("conv");
  write_text(dir / "c.json", R"({"problem": {"preset": "triple-well"}, "convergence": {"dt": [1, 0.5, 0.25]}})");
  const auto r = run({"convergence", "--config", (dir / "c.json").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir / "convergence.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "dt,epsilon_2norm,epsilon_frobenius");
  EXPECT_NE(csv.find("# slope "), std::string::npos);
}
