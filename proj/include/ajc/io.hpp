#pragma once

// Text formats: MatrixMarket coordinate files (1-based by format), CSV
// tables and the JSON sidecar of a jump matrix. Numbers are written with
// 17 significant digits so files round-trip exactly.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ajc/galerkin.hpp"
#include "ajc/generator.hpp"
#include "ajc/jumpchain.hpp"
#include "ajc/oracle.hpp"
#include "ajc/spacetime.hpp"
#include "ajc/sparse.hpp"

namespace ajc::io {

struct MatrixMarketData {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triplet> entries;  // 0-based
};

/// Reads `coordinate real general` files. Throws ConfigError on malformed input.
MatrixMarketData read_matrix_market(std::istream& in, std::string_view source = "<stream>");
MatrixMarketData read_matrix_market(const std::filesystem::path& path);

void write_matrix_market(std::ostream& out, const CsrMatrix& m, std::string_view comment = {});
void write_matrix_market(std::ostream& out, const SparseRateMatrix& q, std::string_view comment = {});

/// Generator from a MatrixMarket file. The diagonal is recomputed from the
/// off-diagonal rates; files that store a diagonal must have zero row sums,
/// and negative off-diagonal rates are rejected.
SparseRateMatrix read_generator(const std::filesystem::path& path);

/// Writes `<stem>.mtx` and the sidecar `<stem>.json` (N, M, time edges,
/// survival masses).
void write_jump_matrix(const JumpMatrix& j, const std::filesystem::path& stem);

std::string format_number(double v);

void write_csv(std::ostream& out, const SpaceTimeVector& v, std::string_view value_name = "value");
void write_csv(std::ostream& out, const SpatialVector& v, std::string_view value_name = "value");
/// One row per visited state: (trajectory, state_index, jump_time).
void write_trajectories_csv(std::ostream& out, const std::vector<TrajectorySample>& paths);
void write_convergence_csv(std::ostream& out, const ConvergenceStudy& study);

/// Opens `path` for writing, creating parent directories. Throws ConfigError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace ajc::io
