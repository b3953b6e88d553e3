#pragma once

// Time-dependent generators of Markov jump processes.
//
// A generator is piecewise constant in time: a TimeGrid with M cells
// T_k = (t_{k-1}, t_k] and one SparseRateMatrix per cell. All indices in
// this library are 0-based (state i in [0, N), time cell k in [0, M)).

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ajc {

class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> edges);

  /// Uniform grid with `cells` intervals on [t0, t1].
  static TimeGrid uniform(double t0, double t1, std::size_t cells);

  std::size_t cells() const { return edges_.size() - 1; }
  const std::vector<double>& edges() const { return edges_; }
  double edge(std::size_t k) const { return edges_[k]; }
  double lower(std::size_t k) const { return edges_[k]; }
  double upper(std::size_t k) const { return edges_[k + 1]; }
  double width(std::size_t k) const { return edges_[k + 1] - edges_[k]; }
  double start() const { return edges_.front(); }
  double end() const { return edges_.back(); }
  bool contains(double t) const { return t >= start() && t <= end(); }

  /// Cell k with t in (t_k, t_{k+1}]; the left end t_0 maps to cell 0.
  std::size_t cell_of(double t) const;

 private:
  std::vector<double> edges_;
};

struct RateEntry {
  std::size_t row;
  std::size_t col;
  double rate;
};

/// Sparse generator matrix. Off-diagonal rates are stored in compressed
/// row form. The stored diagonal is kept only for validation; every
/// computation uses the outbound rate q_i = sum_{j != i} q_ij.
class SparseRateMatrix {
 public:
  SparseRateMatrix() = default;

  /// Build from arbitrary entries, including diagonal ones. Duplicate
  /// coordinates are summed. Entries are not validated here.
  static SparseRateMatrix from_entries(std::size_t n, std::vector<RateEntry> entries);

  /// Build from off-diagonal rates; the diagonal is set to minus the row sum.
  /// Diagonal entries in `entries` are ignored.
  static SparseRateMatrix from_off_diagonal(std::size_t n, std::vector<RateEntry> entries);

  static SparseRateMatrix from_dense(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return diagonal_.size(); }
  std::size_t off_diagonal_nonzeros() const { return cols_.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_rates(std::size_t i) const {
    return {rates_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  double outbound(std::size_t i) const { return outbound_[i]; }
  double stored_diagonal(std::size_t i) const { return diagonal_[i]; }
  /// q_ij for i != j, -q_i on the diagonal.
  double rate(std::size_t i, std::size_t j) const;

  /// Copy with the diagonal recomputed from the off-diagonals.
  SparseRateMatrix normalized() const;

  std::vector<std::vector<double>> to_dense() const;

 private:
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> rates_;
  std::vector<double> diagonal_;
  std::vector<double> outbound_;
};

class RateMatrixSequence {
 public:
  RateMatrixSequence() = default;
  RateMatrixSequence(TimeGrid grid, std::vector<SparseRateMatrix> matrices);

  const TimeGrid& grid() const { return grid_; }
  std::size_t states() const { return matrices_.front().size(); }
  std::size_t cells() const { return grid_.cells(); }
  const SparseRateMatrix& matrix(std::size_t k) const { return matrices_[k]; }
  const std::vector<SparseRateMatrix>& matrices() const { return matrices_; }
  const SparseRateMatrix& at_time(double t) const { return matrices_[grid_.cell_of(t)]; }
  double outbound(std::size_t i, std::size_t k) const { return matrices_[k].outbound(i); }

 private:
  TimeGrid grid_;
  std::vector<SparseRateMatrix> matrices_;
};

struct GeneratorViolation {
  enum class Kind { row_sum, negative_rate };
  Kind kind;
  std::size_t matrix;
  std::size_t row;
  std::size_t col;  // equals row for row-sum violations
  double defect;
};

std::string describe(const GeneratorViolation& v);

inline constexpr double kRowSumTolerance = 1e-12;

std::vector<GeneratorViolation> validate_generator(const SparseRateMatrix& q,
                                                   std::size_t matrix_index = 0);
std::vector<GeneratorViolation> validate_generator(const RateMatrixSequence& seq);

/// Sparse row of the embedded (jump) chain at state i: q_ij / q_i, or a
/// unit self-loop when the state is absorbing.
std::vector<std::pair<std::size_t, double>> embedded_probabilities(const SparseRateMatrix& q,
                                                                   std::size_t i);

/// Potential sampled on a rectangular grid of nx * ny points with square
/// cells of size h. State index = row * nx + column, with row 0 at y0.
struct GridPotential {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double h = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<double> values;

  static GridPotential sample(std::size_t nx, std::size_t ny, double x0, double y0, double h,
                              const std::function<double(double, double)>& potential);

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t row, std::size_t col) const { return row * nx + col; }
  double x(std::size_t i) const { return x0 + h * static_cast<double>(i % nx); }
  double y(std::size_t i) const { return y0 + h * static_cast<double>(i / nx); }
  /// 4-neighbours in ascending index order.
  std::vector<std::size_t> neighbors(std::size_t i) const;
};

/// Square-root approximation: q_ij = Phi * exp(-beta (V_j - V_i) / 2) on
/// grid neighbours, with Phi = 1 / (beta h^2).
SparseRateMatrix sqra_generator(const GridPotential& potential, double beta);

using IntervalBuilder = std::function<SparseRateMatrix(std::size_t k, double lower, double upper)>;

/// Evaluates `builder` on every cell and validates the result.
RateMatrixSequence rate_sequence_from_protocol(const TimeGrid& grid, const IntervalBuilder& builder);

}  // namespace ajc
