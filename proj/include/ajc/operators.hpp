#pragma once

// Solvers on the discretized jump operator: jump activity, synchronization
// to a block edge, reconstruction of the propagator, and the Koopman
// boundary value problem.
//
// Densities are cell masses and move forward with f -> f J; observables
// are cell values and move backward with g -> J g. Block l is synchronized
// at its right edge t_{l+1}.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ajc/galerkin.hpp"
#include "ajc/spacetime.hpp"

namespace ajc {

struct SolverOptions {
  /// Diagonal blocks with at most this many states are factorized directly;
  /// larger ones use Gauss-Seidel iteration.
  std::size_t direct_limit = 2000;
  /// Relative residual required of each diagonal-block solve.
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

/// Solves the systems x = B_k x + r (backward) or x = B_k^T x + r (forward)
/// for the within-block parts B_k of a jump matrix.
class DiagonalBlockSolver {
 public:
  enum class Direction { forward, backward };

  DiagonalBlockSolver(const JumpMatrix& j, Direction dir, SolverOptions opts = {});
  ~DiagonalBlockSolver();
  DiagonalBlockSolver(DiagonalBlockSolver&&) noexcept;
  DiagonalBlockSolver& operator=(DiagonalBlockSolver&&) noexcept;

  /// Overwrites `rhs` with the solution for block k.
  void solve(std::size_t k, std::span<double> rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ActivityOptions {
  double tolerance = 1e-10;
  /// 0 selects 10 M (1 + max_{i,k} q_i(t_k) dT_k).
  std::size_t max_terms = 0;
};

struct ActivityResult {
  SpaceTimeVector activity;
  double residual = 0.0;  // l1 mass of the last term added
  std::size_t terms = 0;
};

/// Truncated Neumann series sum_n f J^n. Throws NonConvergence when the
/// terms are still >= tolerance after max_terms.
ActivityResult jump_activity(const JumpMatrix& j, const SpaceTimeVector& f, ActivityOptions opts = {});

/// The series limit f (I - J)^{-1} by block forward substitution.
SpaceTimeVector activity_solve(const JumpMatrix& j, const SpaceTimeVector& f, SolverOptions opts = {});

/// (S a)_i = sum_{k <= l} a_ik * block_survival(i, k, l).
SpatialVector synchronize(const JumpMatrix& j, const SpaceTimeVector& activity, std::size_t l);

/// Mass of fbar placed in the first time block.
SpaceTimeVector embed_initial(const JumpMatrix& j, const SpatialVector& fbar);

enum class ActivityMethod { direct, series };

/// Density at the right edge of block l for an initial density fbar spread
/// uniformly over the first block.
SpatialVector reconstruct_propagator(const JumpMatrix& j, const SpatialVector& fbar, std::size_t l,
                                     ActivityMethod method = ActivityMethod::direct);

/// Backward hitting problem on block edges. For every cell a = (i, k),
/// `cutoff[a]` >= k names the block at whose right edge the value
/// `terminal[a]` is collected if no jump happens before it:
///
///   c_a = sum_{(j,l): l <= cutoff[a]} J_{a,(j,l)} c_(j,l) + S(i, k, cutoff[a]) terminal[a]
///
/// Solved by back substitution over blocks.
SpaceTimeVector edge_hitting_solve(const JumpMatrix& j, std::span<const std::size_t> cutoff,
                                   std::span<const double> terminal, SolverOptions opts = {});

/// K_ik = E[g(X_{t_{l+1}}) | jump into i uniformly in T_k] for k <= l.
/// Cells of blocks after l hold g.
SpaceTimeVector koopman_solve(const JumpMatrix& j, const SpatialVector& g, std::size_t l,
                              SolverOptions opts = {});

/// koopman_solve with g = indicator of state y.
SpaceTimeVector koopman_matrix_column(const JumpMatrix& j, std::size_t y, std::size_t l,
                                      SolverOptions opts = {});

}  // namespace ajc
