#include "ajc/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "ajc/errors.hpp"
#include "ajc/io.hpp"
#include "ajc/presets.hpp"

namespace ajc {

using nlohmann::json;

namespace {

constexpr double kEdgeSlack = 1e-12;

[[noreturn]] void bad(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

template <class T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    bad(where, e.what());
  }
}

std::size_t get_index(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

double get_positive(const json& j, const std::string& where) {
  const double v = get_number(j, where);
  if (!(v > 0.0) || !std::isfinite(v)) bad(where, "must be positive");
  return v;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) bad(where, "unknown key '" + item.key() + "'");
}

TimeGrid parse_grid(const json& j, const std::string& where) {
  check_keys(j, where, {"edges", "t0", "t1", "cells", "dt"});
  if (j.contains("edges")) {
    try {
      return TimeGrid(get<std::vector<double>>(j["edges"], where + ".edges"));
    } catch (const std::invalid_argument& e) {
      bad(where + ".edges", e.what());
    }
  }
  if (!j.contains("t0") || !j.contains("t1")) bad(where, "needs 'edges' or 't0', 't1' and 'cells' or 'dt'");
  const double t0 = get_number(j["t0"], where + ".t0"), t1 = get_number(j["t1"], where + ".t1");
  if (!(t1 > t0)) bad(where, "t1 must exceed t0");
  std::size_t cells = 0;
  if (j.contains("cells")) {
    cells = get_index(j["cells"], where + ".cells");
  } else if (j.contains("dt")) {
    const double dt = get_positive(j["dt"], where + ".dt");
    const double n = (t1 - t0) / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) bad(where + ".dt", "does not tile [t0, t1]");
    cells = static_cast<std::size_t>(std::round(n));
  } else {
    bad(where, "needs 'cells' or 'dt'");
  }
  if (cells == 0) bad(where, "needs at least one cell");
  return TimeGrid::uniform(t0, t1, cells);
}

std::size_t preset_cells(const json& j, const std::string& where, double horizon, std::size_t fallback) {
  if (j.contains("cells")) return get_index(j["cells"], where + ".cells");
  if (j.contains("dt")) {
    const double dt = get_positive(j["dt"], where + ".dt");
    const double n = horizon / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) bad(where + ".dt", "does not tile the horizon");
    return static_cast<std::size_t>(std::round(n));
  }
  return fallback;
}

BetaSchedule parse_beta(const json& j, const std::string& where, const TimeGrid& grid) {
  BetaSchedule s;
  if (j.is_number()) {
    s.pieces.push_back({std::numeric_limits<double>::infinity(), get_positive(j, where)});
    return s;
  }
  if (j.is_object()) {
    check_keys(j, where, {"per_cell"});
    const auto values = get<std::vector<double>>(j.at("per_cell"), where + ".per_cell");
    if (values.size() != grid.cells()) bad(where + ".per_cell", fmt::format("expected {} values", grid.cells()));
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!(values[k] > 0.0)) bad(fmt::format("{}.per_cell[{}]", where, k), "must be positive");
      s.pieces.push_back({grid.upper(k), values[k]});
    }
    return s;
  }
  if (!j.is_array() || j.empty()) bad(where, "expected a number, {\"per_cell\": [...]} or a list of {until, beta}");
  for (std::size_t p = 0; p < j.size(); ++p) {
    const auto at = fmt::format("{}[{}]", where, p);
    check_keys(j[p], at, {"until", "beta"});
    const double until = get_number(j[p].at("until"), at + ".until");
    const double beta = get_positive(j[p].at("beta"), at + ".beta");
    if (!s.pieces.empty() && !(until > s.pieces.back().first)) bad(at + ".until", "must be increasing");
    s.pieces.push_back({until, beta});
  }
  if (s.pieces.back().first < grid.end() - kEdgeSlack) bad(where, "schedule ends before the time grid");
  return s;
}

SetSpec parse_set(const json& j, const std::string& where) {
  SetSpec s;
  auto parse_rect = [&](const json& r, const std::string& at) {
    check_keys(r, at, {"states", "blocks"});
    SetSpec::Rect rect;
    const auto& st = r.at("states");
    if (!st.is_array()) bad(at + ".states", "expected a list of states");
    for (std::size_t q = 0; q < st.size(); ++q) rect.states.push_back(get_index(st[q], fmt::format("{}.states[{}]", at, q)));
    if (r.contains("blocks")) {
      const auto& b = r["blocks"];
      if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() || !b[1].is_number_integer())
        bad(at + ".blocks", "expected [first, last]");
      rect.first = b[0].get<long long>();
      rect.last = b[1].get<long long>();
    }
    s.rects.push_back(std::move(rect));
  };
  if (j.is_object()) {
    parse_rect(j, where);
    return s;
  }
  if (!j.is_array()) bad(where, "expected a list of [state, block] pairs or rectangles");
  for (std::size_t p = 0; p < j.size(); ++p) {
    const auto at = fmt::format("{}[{}]", where, p);
    if (j[p].is_object()) {
      parse_rect(j[p], at);
    } else if (j[p].is_array() && j[p].size() == 2 && j[p][1].is_number_integer()) {
      s.cells.push_back({get_index(j[p][0], at + "[0]"), j[p][1].get<long long>()});
    } else {
      bad(at, "expected [state, block] or {states, blocks}");
    }
  }
  return s;
}

VectorSpec parse_vector(const json& j, const std::string& where) {
  VectorSpec v;
  if (j.is_number()) {
    v.value = j.get<double>();
  } else if (j.is_array()) {
    v.value = get<std::vector<double>>(j, where);
  } else if (j.is_object()) {
    check_keys(j, where, {"state", "states", "constant"});
    if (j.contains("state")) {
      v.value = std::vector<std::size_t>{get_index(j["state"], where + ".state")};
    } else if (j.contains("states")) {
      std::vector<std::size_t> states;
      for (std::size_t q = 0; q < j["states"].size(); ++q)
        states.push_back(get_index(j["states"][q], fmt::format("{}.states[{}]", where, q)));
      v.value = states;
    } else if (j.contains("constant")) {
      v.value = get_number(j["constant"], where + ".constant");
    } else {
      bad(where, "needs 'state', 'states' or 'constant'");
    }
  } else {
    bad(where, "expected a number, a list of values or {state|states|constant}");
  }
  return v;
}

long long get_block(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer block (negative counts from the end)");
  return j.get<long long>();
}

ProblemConfig parse_problem(const json& j, const std::filesystem::path& base) {
  const std::string where = "problem";
  ProblemConfig p;
  if (j.contains("preset")) {
    check_keys(j, where, {"preset", "cells", "dt"});
    const auto name = get<std::string>(j["preset"], where + ".preset");
    if (name == "two-state") {
      p.kind = ProblemConfig::Kind::two_state;
      const auto cells = preset_cells(j, where, presets::kTwoStateHorizon, 8);
      if (cells == 0 || cells % 2 != 0) bad(where, "two-state needs an even number of cells");
      p.grid = TimeGrid::uniform(0.0, presets::kTwoStateHorizon, cells);
    } else if (name == "triple-well") {
      p.kind = ProblemConfig::Kind::triple_well;
      const auto cells = preset_cells(j, where, presets::kTripleWellHorizon, 6);
      if (cells == 0 || cells % 2 != 0) bad(where, "triple-well needs an even number of cells");
      p.grid = TimeGrid::uniform(0.0, presets::kTripleWellHorizon, cells);
    } else {
      bad(where + ".preset", "unknown preset '" + name + "' (two-state, triple-well)");
    }
    return p;
  }
  if (!j.contains("grid")) bad(where, "needs 'preset' or 'grid'");
  p.grid = parse_grid(j["grid"], where + ".grid");
  if (j.contains("sqra")) {
    check_keys(j, where, {"grid", "sqra"});
    p.kind = ProblemConfig::Kind::sqra;
    const auto& s = j["sqra"];
    const std::string at = where + ".sqra";
    check_keys(s, at, {"nx", "ny", "h", "origin", "potential", "values", "beta"});
    const auto nx = get_index(s.at("nx"), at + ".nx"), ny = get_index(s.at("ny"), at + ".ny");
    if (nx == 0 || ny == 0) bad(at, "nx and ny must be positive");
    const double h = get_positive(s.at("h"), at + ".h");
    double x0 = 0.0, y0 = 0.0;
    if (s.contains("origin")) {
      const auto o = get<std::vector<double>>(s["origin"], at + ".origin");
      if (o.size() != 2) bad(at + ".origin", "expected [x0, y0]");
      x0 = o[0];
      y0 = o[1];
    }
    if (s.contains("values")) {
      p.potential = GridPotential{nx, ny, h, x0, y0, get<std::vector<double>>(s["values"], at + ".values")};
      if (p.potential.values.size() != nx * ny) bad(at + ".values", fmt::format("expected {} values", nx * ny));
    } else {
      const auto name = s.contains("potential") ? get<std::string>(s["potential"], at + ".potential") : "triple-well";
      if (name != "triple-well") bad(at + ".potential", "unknown potential '" + name + "' (triple-well)");
      p.potential = GridPotential::sample(nx, ny, x0, y0, h, presets::triple_well_potential);
    }
    if (!s.contains("beta")) bad(at, "needs 'beta'");
    p.beta = parse_beta(s["beta"], at + ".beta", p.grid);
    return p;
  }
  check_keys(j, where, {"grid", "matrices", "matrix"});
  p.kind = ProblemConfig::Kind::files;
  if (j.contains("matrix")) {
    p.matrices.push_back(base / get<std::string>(j["matrix"], where + ".matrix"));
  } else if (j.contains("matrices")) {
    for (const auto& m : get<std::vector<std::string>>(j["matrices"], where + ".matrices")) p.matrices.push_back(base / m);
    if (p.matrices.size() != p.grid.cells())
      bad(where + ".matrices", fmt::format("expected {} files (one per cell), got {}", p.grid.cells(), p.matrices.size()));
  } else {
    bad(where, "needs 'preset', 'sqra', 'matrix' or 'matrices'");
  }
  return p;
}

}  // namespace

double BetaSchedule::at_cell(double lower, double upper) const {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [until, beta] : pieces) {
    if (lower >= prev - kEdgeSlack && upper <= until + kEdgeSlack) return beta;
    if (upper > until + kEdgeSlack && lower < until - kEdgeSlack)
      throw ConfigError(fmt::format("beta schedule switches at {} inside cell ({}, {}]", until, lower, upper));
    prev = until;
  }
  throw ConfigError(fmt::format("beta schedule does not cover ({}, {}]", lower, upper));
}

std::vector<double> BetaSchedule::switch_times() const {
  std::vector<double> out;
  for (std::size_t p = 0; p + 1 < pieces.size(); ++p) out.push_back(pieces[p].first);
  return out;
}

RateMatrixSequence ProblemConfig::build() const {
  switch (kind) {
    case Kind::two_state: return presets::two_state(grid.cells());
    case Kind::triple_well: return presets::triple_well(grid);
    case Kind::sqra: return (*builder())(grid);
    case Kind::files: {
      std::vector<SparseRateMatrix> mats;
      for (const auto& path : matrices) mats.push_back(io::read_generator(path));
      if (mats.size() == 1)
        while (mats.size() < grid.cells()) mats.push_back(mats.front());
      for (std::size_t k = 1; k < mats.size(); ++k)
        if (mats[k].size() != mats.front().size())
          throw ConfigError(fmt::format("{}: {} states, expected {}", matrices[std::min(k, matrices.size() - 1)].string(),
                                        mats[k].size(), mats.front().size()));
      return RateMatrixSequence(grid, std::move(mats));
    }
  }
  throw ConfigError("unknown problem kind");
}

std::optional<GridSequenceBuilder> ProblemConfig::builder() const {
  switch (kind) {
    case Kind::two_state:
      return GridSequenceBuilder([](const TimeGrid& g) {
        return rate_sequence_from_protocol(g, [](std::size_t, double, double upper) {
          return presets::two_state_matrix(upper <= presets::kTwoStateSwitch + kEdgeSlack);
        });
      });
    case Kind::triple_well:
      return GridSequenceBuilder([](const TimeGrid& g) { return presets::triple_well(g); });
    case Kind::sqra: {
      const auto pot = potential;
      const auto schedule = beta;
      return GridSequenceBuilder([pot, schedule](const TimeGrid& g) {
        return rate_sequence_from_protocol(
            g, [&](std::size_t, double lo, double hi) { return sqra_generator(pot, schedule.at_cell(lo, hi)); });
      });
    }
    case Kind::files: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<double> ProblemConfig::switch_times() const {
  switch (kind) {
    case Kind::two_state: return {presets::kTwoStateSwitch};
    case Kind::triple_well: return {presets::kTripleWellSwitch};
    case Kind::sqra: return beta.switch_times();
    case Kind::files: return {grid.edges().begin() + 1, grid.edges().end() - 1};
  }
  return {};
}

std::size_t resolve_block(long long block, std::size_t blocks, const std::string& where) {
  const long long m = static_cast<long long>(blocks);
  const long long b = block < 0 ? m + block : block;
  if (b < 0 || b >= m) throw ConfigError(fmt::format("{}: block {} out of range for {} blocks", where, block, blocks));
  return static_cast<std::size_t>(b);
}

SpaceTimeSet SetSpec::resolve(const SpaceTimeIndexer& idx) const {
  SpaceTimeSet s(idx);
  for (const auto& [state, block] : cells) {
    if (state >= idx.states()) throw ConfigError(fmt::format("set: state {} out of range", state));
    s.insert(state, resolve_block(block, idx.blocks(), "set"));
  }
  for (const auto& r : rects) {
    for (std::size_t st : r.states)
      if (st >= idx.states()) throw ConfigError(fmt::format("set: state {} out of range", st));
    const auto lo = resolve_block(r.first, idx.blocks(), "set"), hi = resolve_block(r.last, idx.blocks(), "set");
    if (lo > hi) throw ConfigError("set: rectangle block range is empty");
    s |= SpaceTimeSet::rectangle(idx, r.states, lo, hi);
  }
  return s;
}

SpatialVector VectorSpec::resolve(std::size_t states) const {
  if (const auto* full = std::get_if<std::vector<double>>(&value)) {
    if (full->size() != states) throw ConfigError(fmt::format("vector has {} values, expected {}", full->size(), states));
    return SpatialVector(*full);
  }
  if (const auto* ind = std::get_if<std::vector<std::size_t>>(&value)) {
    SpatialVector v(states);
    for (std::size_t i : *ind) {
      if (i >= states) throw ConfigError(fmt::format("vector: state {} out of range", i));
      v[i] = 1.0;
    }
    return v;
  }
  return SpatialVector(states, std::get<double>(value));
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_null() || (j.is_object() && j.empty())) throw UsageError("configuration is empty");
  check_keys(j, "config",
             {"problem", "seed", "solver", "sample", "propagate", "koopman", "committor", "coherence", "convergence"});
  if (!j.contains("problem")) throw UsageError("configuration has no 'problem'");
  RunConfig c;
  c.problem = parse_problem(j["problem"], base_dir);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed", "expected an unsigned 64-bit integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    check_keys(s, "solver", {"direct_limit", "tolerance", "max_iterations", "activity_tolerance", "activity_max_terms"});
    if (s.contains("direct_limit")) c.solver.direct_limit = get_index(s["direct_limit"], "solver.direct_limit");
    if (s.contains("tolerance")) c.solver.tolerance = get_positive(s["tolerance"], "solver.tolerance");
    if (s.contains("max_iterations")) c.solver.max_iterations = get_index(s["max_iterations"], "solver.max_iterations");
    if (s.contains("activity_tolerance"))
      c.activity.tolerance = get_positive(s["activity_tolerance"], "solver.activity_tolerance");
    if (s.contains("activity_max_terms"))
      c.activity.max_terms = get_index(s["activity_max_terms"], "solver.activity_max_terms");
  }
  if (j.contains("sample")) {
    const auto& s = j["sample"];
    check_keys(s, "sample", {"state", "time", "horizon", "trajectories", "first_jump"});
    if (s.contains("state")) c.sample.state = get_index(s["state"], "sample.state");
    if (s.contains("time")) c.sample.time = get_number(s["time"], "sample.time");
    if (s.contains("horizon")) c.sample.horizon = get_number(s["horizon"], "sample.horizon");
    if (s.contains("trajectories")) c.sample.trajectories = get_index(s["trajectories"], "sample.trajectories");
    if (s.contains("first_jump")) {
      const auto& f = s["first_jump"];
      check_keys(f, "sample.first_jump", {"state", "block", "samples"});
      if (f.contains("state")) c.sample.first_jump_state = get_index(f["state"], "sample.first_jump.state");
      if (f.contains("block")) c.sample.first_jump_block = get_block(f["block"], "sample.first_jump.block");
      if (f.contains("samples")) c.sample.first_jump_samples = get_index(f["samples"], "sample.first_jump.samples");
    }
  }
  if (j.contains("propagate")) {
    const auto& s = j["propagate"];
    check_keys(s, "propagate", {"initial", "block", "method"});
    if (s.contains("initial")) c.propagate.initial = parse_vector(s["initial"], "propagate.initial");
    if (s.contains("block")) c.propagate.block = get_block(s["block"], "propagate.block");
    if (s.contains("method")) {
      const auto m = get<std::string>(s["method"], "propagate.method");
      if (m == "direct") c.propagate.method = ActivityMethod::direct;
      else if (m == "series") c.propagate.method = ActivityMethod::series;
      else bad("propagate.method", "expected 'direct' or 'series'");
    }
  }
  if (j.contains("koopman")) {
    const auto& s = j["koopman"];
    check_keys(s, "koopman", {"observable", "block"});
    if (s.contains("observable")) c.koopman.observable = parse_vector(s["observable"], "koopman.observable");
    if (s.contains("block")) c.koopman.block = get_block(s["block"], "koopman.block");
  }
  if (j.contains("committor")) {
    const auto& s = j["committor"];
    check_keys(s, "committor", {"A", "B", "tail"});
    if (s.contains("A")) c.committor.a = parse_set(s["A"], "committor.A");
    if (s.contains("B")) c.committor.b = parse_set(s["B"], "committor.B");
    if (s.contains("tail")) {
      const auto& t = s["tail"];
      if (t.is_number()) {
        const double v = t.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) bad("committor.tail", "value must lie in [0, 1]");
        c.committor.tail = TailPolicy::fixed(v);
      } else {
        const auto name = get<std::string>(t, "committor.tail");
        if (name == "absorb_to_b") c.committor.tail = TailPolicy::to_b();
        else if (name == "absorb_to_a") c.committor.tail = TailPolicy::to_a();
        else bad("committor.tail", "expected 'absorb_to_b', 'absorb_to_a' or a number");
      }
    }
  }
  if (j.contains("coherence")) {
    const auto& s = j["coherence"];
    check_keys(s, "coherence", {"C", "count_survival"});
    if (s.contains("C")) c.coherence.c = parse_set(s["C"], "coherence.C");
    if (s.contains("count_survival")) c.coherence.count_survival = get<bool>(s["count_survival"], "coherence.count_survival");
  }
  if (j.contains("convergence")) {
    const auto& s = j["convergence"];
    check_keys(s, "convergence", {"dt"});
    if (s.contains("dt")) {
      c.convergence.dt = get<std::vector<double>>(s["dt"], "convergence.dt");
      for (std::size_t r = 0; r < c.convergence.dt.size(); ++r)
        if (!(c.convergence.dt[r] > 0.0)) bad(fmt::format("convergence.dt[{}]", r), "must be positive");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw UsageError("configuration " + path.string() + " is empty");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(j, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig preset_config(const std::string& name) { return parse_config(json{{"problem", {{"preset", name}}}}); }

}  // namespace ajc
