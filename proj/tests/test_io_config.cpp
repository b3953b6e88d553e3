#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ajc/config.hpp"
#include "ajc/errors.hpp"
#include "ajc/io.hpp"
#include "ajc/presets.hpp"
#include "support.hpp"

using namespace ajc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ajc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(MatrixMarket, RoundTripsJumpMatrix) {
  const auto j = assemble(test_support::random_sequence(5, 3, 1));
  std::stringstream ss;
  io::write_matrix_market(ss, j.rows(), "test");
  const auto data = io::read_matrix_market(ss);
  EXPECT_EQ(data.rows, 15u);
  ASSERT_EQ(data.entries.size(), j.nnz());
  for (const auto& t : data.entries) EXPECT_EQ(t.value, j.rows().coeff(t.row, t.col));
}

TEST(MatrixMarket, RejectsMalformedInput) {
  const auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return io::read_matrix_market(in);
  };
  EXPECT_THROW(parse(""), ConfigError);
  EXPECT_THROW(parse("%%MatrixMarket matrix array real general\n2 2\n"), ConfigError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n"), ConfigError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"), ConfigError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n"), ConfigError);
  const auto ok = parse("%%MatrixMarket matrix coordinate real general\n% c\n\n2 2 1\n1 2 0.5\n");
  EXPECT_EQ(ok.entries.size(), 1u);
  EXPECT_EQ(ok.entries[0].col, 1u);
}

TEST(ReadGenerator, DiagonalOptionalButChecked) {
  const auto dir = scratch_dir("gen");
  write_text(dir / "off.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.5\n2 1 0.5\n");
  const auto q = io::read_generator(dir / "off.mtx");
  EXPECT_DOUBLE_EQ(q.rate(0, 0), -1.5);
  write_text(dir / "bad.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.5\n1 1 -1.0\n");
  EXPECT_THROW(io::read_generator(dir / "bad.mtx"), ConfigError);
  write_text(dir / "neg.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 -1.5\n");
  EXPECT_THROW(io::read_generator(dir / "neg.mtx"), ConfigError);
  EXPECT_THROW(io::read_generator(dir / "missing.mtx"), ConfigError);
  std::stringstream ss;
  io::write_matrix_market(ss, q);
  write_text(dir / "rt.mtx", ss.str());
  const auto back = io::read_generator(dir / "rt.mtx");
  EXPECT_EQ(back.rate(1, 0), 0.5);
}

TEST(JumpMatrixFiles, SidecarHeader) {
  const auto dir = scratch_dir("jm");
  const auto j = assemble(presets::two_state());
  io::write_jump_matrix(j, dir / "jm");
  std::ifstream side(dir / "jm.json");
  const auto h = json::parse(side);
  EXPECT_EQ(h["N"], 2);
  EXPECT_EQ(h["M"], 8);
  EXPECT_EQ(h["edges"].size(), 9u);
  EXPECT_EQ(h["survival"].size(), 16u);
  EXPECT_DOUBLE_EQ(h["survival"][0].get<double>(), j.closed_form_survival(0));
  EXPECT_EQ(io::read_matrix_market(dir / "jm.mtx").entries.size(), 36u);
}

TEST(Csv, HeadersAndOrder) {
  SpaceTimeVector v(SpaceTimeIndexer(2, 2), VectorKind::observable, {0.5, 1.0, 0.0, 0.25});
  std::ostringstream out;
  io::write_csv(out, v);
  EXPECT_EQ(out.str(), "state,block,value\n0,0,0.5\n1,0,1\n0,1,0\n1,1,0.25\n");
  std::ostringstream sp;
  io::write_csv(sp, SpatialVector(std::vector<double>{0.1}), "density");
  EXPECT_EQ(sp.str(), "state,density\n0,0.10000000000000001\n");
}

TEST(Config, PresetDefaults) {
  const auto rc = preset_config("triple-well");
  EXPECT_EQ(rc.problem.kind, ProblemConfig::Kind::triple_well);
  EXPECT_EQ(rc.problem.grid.cells(), 6u);
  EXPECT_EQ(assemble(rc.problem.build()).nnz(), 4620u);
  const auto two = parse_config(json::parse(R"({"problem": {"preset": "two-state", "dt": 0.5}})"));
  EXPECT_EQ(two.problem.grid.cells(), 16u);
  EXPECT_THROW(preset_config("four-state"), ConfigError);
}

TEST(Config, EmptyIsUsageError) {
  EXPECT_THROW(parse_config(json::object()), UsageError);
  const auto dir = scratch_dir("empty");
  write_text(dir / "e.json", "  \n");
  EXPECT_THROW(load_config(dir / "e.json"), UsageError);
  write_text(dir / "bad.json", "{ nope");
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

TEST(Config, ErrorsNameTheJsonPath) {
  try {
    parse_config(json::parse(R"({"problem": {"preset": "two-state"}, "committor": {"A": [[0, "x"]]}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("committor.A[0]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config(json::parse(R"({"problem": {"preset": "two-state"}, "bogus": 1})")), ConfigError);
}

TEST(Config, SqraMatchesPreset) {
  const auto rc = parse_config(json::parse(R"({
    "problem": {
      "grid": {"t0": 0, "t1": 2, "cells": 6},
      "sqra": {"nx": 9, "ny": 7, "h": 0.5, "origin": [-2, -1], "potential": "triple-well",
               "beta": [{"until": 1, "beta": 1}, {"until": 2, "beta": 10}]}
    }})"));
  const auto a = assemble(rc.problem.build());
  const auto b = assemble(presets::triple_well());
  EXPECT_EQ(a.rows().values(), b.rows().values());
  EXPECT_EQ(rc.problem.switch_times(), std::vector<double>{1.0});
  ASSERT_TRUE(rc.problem.builder().has_value());
}

TEST(Config, SqraScheduleMustAlignWithCells) {
  const auto rc = parse_config(json::parse(R"({
    "problem": {
      "grid": {"t0": 0, "t1": 2, "cells": 3},
      "sqra": {"nx": 3, "ny": 2, "h": 1.0, "values": [0, 1, 2, 0, 1, 2],
               "beta": [{"until": 1, "beta": 1}, {"until": 2, "beta": 2}]}
    }})"));
  EXPECT_THROW(rc.problem.build(), std::exception);
}

TEST(Config, FileProblemResolvesRelativePaths) {
  const auto dir = scratch_dir("files");
  write_text(dir / "q.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n2 1 2\n");
  write_text(dir / "run.json", R"({"problem": {"grid": {"edges": [0, 0.5, 1.5]}, "matrix": "q.mtx"}, "seed": 9})");
  const auto rc = load_config(dir / "run.json");
  EXPECT_EQ(rc.seed, 9u);
  const auto seq = rc.problem.build();
  EXPECT_EQ(seq.cells(), 2u);
  EXPECT_EQ(seq.outbound(1, 1), 2.0);
  EXPECT_FALSE(rc.problem.builder().has_value());
  write_text(dir / "two.json", R"({"problem": {"grid": {"edges": [0, 1, 2]}, "matrices": ["q.mtx"]}})");
  EXPECT_THROW(load_config(dir / "two.json"), ConfigError);
}

TEST(Config, SetsAndVectors) {
  const auto rc = parse_config(json::parse(R"({
    "problem": {"preset": "two-state"},
    "committor": {"A": [[1, -1], {"states": [0], "blocks": [2, 3]}], "B": {"states": [0, 1], "blocks": [5, 5]},
                  "tail": 0.5},
    "koopman": {"observable": {"state": 1}, "block": 3},
    "propagate": {"initial": [0.25, 0.75], "method": "series"}
  })"));
  const SpaceTimeIndexer idx(2, 8);
  const auto a = rc.committor.a->resolve(idx);
  EXPECT_EQ(a.count(), 3u);
  EXPECT_TRUE(a.contains(1, 7));
  EXPECT_TRUE(a.contains(0, 3));
  EXPECT_EQ(rc.committor.b->resolve(idx).count(), 2u);
  EXPECT_EQ(rc.committor.tail.kind, TailPolicy::Kind::value);
  EXPECT_EQ(rc.koopman.observable.resolve(2).values, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(rc.propagate.method, ActivityMethod::series);
  EXPECT_THROW(rc.propagate.initial.resolve(3), ConfigError);
  EXPECT_EQ(resolve_block(-1, 8, "x"), 7u);
  EXPECT_THROW(resolve_block(8, 8, "x"), ConfigError);
  EXPECT_THROW(resolve_block(-9, 8, "x"), ConfigError);
}
