#pragma once

// JSON run configuration for the command-line tool. The schema is
// documented in README.md. Every parse error is a ConfigError whose message
// starts with the JSON path of the offending value.

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ajc/committor.hpp"
#include "ajc/generator.hpp"
#include "ajc/operators.hpp"
#include "ajc/oracle.hpp"

namespace ajc {

/// Piecewise-constant inverse temperature: beta = pieces[p].second on
/// (pieces[p-1].first, pieces[p].first].
struct BetaSchedule {
  std::vector<std::pair<double, double>> pieces;  // (until, beta)
  double at_cell(double lower, double upper) const;
  std::vector<double> switch_times() const;
};

struct ProblemConfig {
  enum class Kind { two_state, triple_well, files, sqra };
  Kind kind = Kind::two_state;
  TimeGrid grid;
  std::vector<std::filesystem::path> matrices;  // files: one per cell, or one for all cells
  GridPotential potential;                      // sqra
  BetaSchedule beta;                            // sqra

  RateMatrixSequence build() const;
  /// Builder for refinement sweeps; absent for file-based problems.
  std::optional<GridSequenceBuilder> builder() const;
  std::vector<double> switch_times() const;
};

/// A set of cells given as (state, block) pairs and rectangles. Negative
/// block numbers count from the last block (-1 is the last one).
struct SetSpec {
  struct Rect {
    std::vector<std::size_t> states;
    long long first = 0;
    long long last = -1;
  };
  std::vector<std::pair<std::size_t, long long>> cells;
  std::vector<Rect> rects;

  SpaceTimeSet resolve(const SpaceTimeIndexer& idx) const;
};

/// Spatial vector given as a full array, an indicator of one or more
/// states, or a constant.
struct VectorSpec {
  std::variant<std::vector<double>, std::vector<std::size_t>, double> value = 0.0;
  SpatialVector resolve(std::size_t states) const;
};

/// Resolves negative block numbers; throws ConfigError when out of range.
std::size_t resolve_block(long long block, std::size_t blocks, const std::string& where);

struct SampleConfig {
  std::size_t state = 0;
  double time = 0.0;
  std::optional<double> horizon;
  std::size_t trajectories = 10;
  std::size_t first_jump_state = 0;
  long long first_jump_block = 0;
  std::uint64_t first_jump_samples = 100000;
};

struct PropagateConfig {
  VectorSpec initial{std::vector<std::size_t>{0}};
  long long block = -1;
  ActivityMethod method = ActivityMethod::direct;
};

struct KoopmanConfig {
  VectorSpec observable{1.0};
  long long block = -1;
};

struct CommittorConfig {
  std::optional<SetSpec> a;
  std::optional<SetSpec> b;
  TailPolicy tail = TailPolicy::to_b();
};

struct CoherenceConfig {
  std::optional<SetSpec> c;
  bool count_survival = false;
};

struct ConvergenceConfig {
  std::vector<double> dt;  // empty: 1, 1/2, ..., 1/32 scaled to the horizon
};

struct RunConfig {
  ProblemConfig problem;
  std::uint64_t seed = 1;
  SolverOptions solver;
  ActivityOptions activity;
  SampleConfig sample;
  PropagateConfig propagate;
  KoopmanConfig koopman;
  CommittorConfig committor;
  CoherenceConfig coherence;
  ConvergenceConfig convergence;
};

/// Relative file paths are resolved against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Configuration of a built-in problem with all defaults.
RunConfig preset_config(const std::string& name);

}  // namespace ajc
