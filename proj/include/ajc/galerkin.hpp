#pragma once

// Ulam-Galerkin discretization of the jump operator onto indicator functions
// of space-time cells (i, k) = {x_i} x T_k.
//
// Entry (i,k) -> (j,l) is the probability that a particle which jumped into
// state i at a time uniformly distributed in T_k makes its next jump into
// state j during T_l. For a generator that is constant on each cell it has a
// closed form:
//
//   k == l:  q_ij(k) psi(q_ik, dT_k) / dT_k
//   k <  l:  phi(q_ik, dT_k) / dT_k * q_ij(l) / q_il * (1 - s_il) * prod_{k<m<l} s_im
//
// with s_im = exp(-q_im dT_m), phi(q, d) = (1 - e^{-qd}) / q and
// psi(q, d) = (e^{-qd} + qd - 1) / q^2 (limits d and d^2/2 at q = 0).
// Entries are stored wherever q_ij(l) > 0, even if the value underflows.

#include <cstddef>
#include <span>
#include <vector>

#include "ajc/generator.hpp"
#include "ajc/spacetime.hpp"
#include "ajc/sparse.hpp"

namespace ajc {

/// (1 - e^{-q d}) / q, equal to d at q = 0.
double phi(double q, double d);
/// (e^{-q d} + q d - 1) / q^2, equal to d^2 / 2 at q = 0.
double psi(double q, double d);

class JumpMatrix {
 public:
  JumpMatrix() = default;
  JumpMatrix(SpaceTimeIndexer indexer, TimeGrid grid, CsrMatrix rows,
             std::vector<double> closed_form_survival, double max_cell_hazard = 0.0);

  const SpaceTimeIndexer& indexer() const { return indexer_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t states() const { return indexer_.states(); }
  std::size_t blocks() const { return indexer_.blocks(); }
  std::size_t nnz() const { return rows_.nnz(); }

  /// Row form: row = source cell, column = destination cell.
  const CsrMatrix& rows() const { return rows_; }
  /// Column form (the transpose), used to push densities forward.
  const CsrMatrix& columns() const { return cols_; }

  double entry(std::size_t i, std::size_t k, std::size_t j, std::size_t l) const {
    return rows_.coeff(indexer_.flat(i, k), indexer_.flat(j, l));
  }

  /// Total jump probability out of a cell (row sum).
  double jump_mass(std::size_t flat) const { return jump_mass_[flat]; }
  /// 1 - row sum: probability of no further jump before the end of the grid.
  double survival_mass(std::size_t flat) const { return 1.0 - jump_mass_[flat]; }
  /// The same probability from the closed-form survival integral.
  double closed_form_survival(std::size_t flat) const { return closed_survival_[flat]; }

  /// 1 - sum_{j, s <= l} J_{ik,js}: probability of no jump up to t_{l+1}
  /// (the right edge of block l). Equals 1 for l < k.
  double block_survival(std::size_t i, std::size_t k, std::size_t l) const;

  /// block_survival(i, k, l) for all cells with k <= l, indexed by flat cell
  /// (entries of later blocks are 1).
  std::vector<double> block_survival_profile(std::size_t l) const;

  /// max over (i, k) of q_i(t_k) dT_k, recorded at assembly.
  double max_cell_hazard() const { return max_cell_hazard_; }

 private:
  SpaceTimeIndexer indexer_;
  TimeGrid grid_;
  CsrMatrix rows_;
  CsrMatrix cols_;
  std::vector<double> jump_mass_;
  std::vector<double> closed_survival_;
  double max_cell_hazard_ = 0.0;
};

/// OpenMP-parallel over rows (i, k).
JumpMatrix assemble(const RateMatrixSequence& seq);

namespace serial {
JumpMatrix assemble(const RateMatrixSequence& seq);
}  // namespace serial

struct RowMass {
  double jump;
  double survival;  // closed form
};

RowMass row_mass(const JumpMatrix& j, std::size_t i, std::size_t k);

/// Push a density one jump forward (f J).
SpaceTimeVector apply_forward(const JumpMatrix& j, const SpaceTimeVector& f);
/// Pull an observable one jump back (J g).
SpaceTimeVector apply_adjoint(const JumpMatrix& j, const SpaceTimeVector& g);

namespace serial {
SpaceTimeVector apply_forward(const JumpMatrix& j, const SpaceTimeVector& f);
SpaceTimeVector apply_adjoint(const JumpMatrix& j, const SpaceTimeVector& g);
}  // namespace serial

}  // namespace ajc
