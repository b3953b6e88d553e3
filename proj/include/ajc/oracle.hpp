#pragma once

// Dense reference computations used to verify the jump-chain machinery:
// matrix exponentials of piecewise-constant generators, exact propagators,
// and the error of the reconstructed propagator under time refinement.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "ajc/galerkin.hpp"
#include "ajc/generator.hpp"

namespace ajc {

using DenseMatrix = Eigen::MatrixXd;

/// Largest state space the dense oracle accepts.
inline constexpr std::size_t kOracleMaxStates = 500;

DenseMatrix to_dense(const SparseRateMatrix& q);

/// exp(t Q) by scaling and squaring of a truncated Taylor series. When Q is a
/// generator the diagonal is re-derived from the off-diagonals after every
/// squaring so rows keep summing to one.
DenseMatrix expm(const DenseMatrix& q, double t);

/// Ordered product of cell exponentials over [s, t]; row i is the law at t
/// of a process started in i at s.
DenseMatrix exact_propagator(const RateMatrixSequence& seq, double s, double t);

/// Row i holds reconstruct_propagator(J, e_i, l).
DenseMatrix reconstructed_propagator_matrix(const JumpMatrix& j, std::size_t l);

/// Largest singular value by power iteration on A^T A.
double spectral_norm(const DenseMatrix& a, double tolerance = 1e-10);

struct NormError {
  double spectral = 0.0;
  double frobenius = 0.0;
};

/// || reconstructed propagator at the right edge of block l - exact propagator from t_0 ||.
NormError operator_norm_error(const JumpMatrix& j, const RateMatrixSequence& seq, std::size_t l);

using GridSequenceBuilder = std::function<RateMatrixSequence(const TimeGrid&)>;

struct ConvergenceRow {
  double dt = 0.0;
  std::size_t cells = 0;
  std::size_t nnz = 0;
  NormError error;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  std::optional<double> slope;  // least-squares slope of log(error) vs log(dt)
  bool monotone = true;         // spectral error strictly decreasing along the rows
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs the refinement sweep on [t0, t1]. `dt_list` must be descending and
/// every dt must tile [t0, t1] with the protocol `switch_times` on cell edges.
ConvergenceStudy convergence_study(const GridSequenceBuilder& builder, double t0, double t1,
                                   const std::vector<double>& switch_times, const std::vector<double>& dt_list);

}  // namespace ajc
