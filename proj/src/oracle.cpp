#include "ajc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ajc/errors.hpp"
#include "ajc/operators.hpp"

namespace ajc {

namespace {

constexpr int kTaylorTerms = 20;
constexpr double kScaledNorm = 0.5;

bool is_generator(const DenseMatrix& q) {
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (i == j) continue;
      if (q(i, j) < 0.0) return false;
      off += q(i, j);
    }
    if (std::abs(off + q(i, i)) > 1e-12 * std::max(1.0, off)) return false;
  }
  return true;
}

void fix_generator_diagonal(DenseMatrix& d) {
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      if (i != j) off += d(i, j);
    d(i, i) = -off;
  }
}

void check_oracle_size(std::size_t n) {
  if (n > kOracleMaxStates)
    throw std::invalid_argument("dense oracle limited to " + std::to_string(kOracleMaxStates) + " states");
}

}  // namespace

DenseMatrix to_dense(const SparseRateMatrix& q) {
  const auto n = static_cast<Eigen::Index>(q.size());
  DenseMatrix d = DenseMatrix::Zero(n, n);
  for (std::size_t i = 0; i < q.size(); ++i) {
    d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -q.outbound(i);
    auto cols = q.row_cols(i);
    auto rates = q.row_rates(i);
    for (std::size_t p = 0; p < cols.size(); ++p)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[p])) = rates[p];
  }
  return d;
}

DenseMatrix expm(const DenseMatrix& q, double t) {
  if (q.rows() != q.cols()) throw std::invalid_argument("expm needs a square matrix");
  if (!(t >= 0.0)) throw std::invalid_argument("expm needs t >= 0");
  check_oracle_size(static_cast<std::size_t>(q.rows()));
  const auto n = q.rows();
  const bool generator = is_generator(q);
  DenseMatrix a = t * q;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  if (!std::isfinite(norm)) throw std::overflow_error("expm: non-finite input");
  int squarings = 0;
  if (norm > kScaledNorm) squarings = static_cast<int>(std::ceil(std::log2(norm / kScaledNorm)));
  if (squarings > 1000) throw std::overflow_error("expm: input norm too large");
  a /= std::ldexp(1.0, squarings);
  // D = exp(A) - I via Horner: A (I + A/2 (I + A/3 (...)))
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  DenseMatrix d = id;
  for (int k = kTaylorTerms; k >= 2; --k) d = id + (a * d) / static_cast<double>(k);
  d = a * d;
  if (generator) fix_generator_diagonal(d);
  for (int s = 0; s < squarings; ++s) {
    d = (2.0 * d + d * d).eval();
    if (generator) fix_generator_diagonal(d);
  }
  return id + d;
}

DenseMatrix exact_propagator(const RateMatrixSequence& seq, double s, double t) {
  const auto& grid = seq.grid();
  if (!(s <= t) || !grid.contains(s) || !grid.contains(t))
    throw std::invalid_argument("exact propagator needs t_0 <= s <= t <= t_M");
  check_oracle_size(seq.states());
  const auto n = static_cast<Eigen::Index>(seq.states());
  DenseMatrix p = DenseMatrix::Identity(n, n);
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const double lo = std::max(s, grid.lower(k)), hi = std::min(t, grid.upper(k));
    if (hi <= lo) continue;
    p = (p * expm(to_dense(seq.matrix(k)), hi - lo)).eval();
  }
  return p;
}

DenseMatrix reconstructed_propagator_matrix(const JumpMatrix& j, std::size_t l) {
  check_oracle_size(j.states());
  const auto n = static_cast<Eigen::Index>(j.states());
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < j.states(); ++i) {
    const auto row = reconstruct_propagator(j, SpatialVector::unit(j.states(), i), l);
    for (std::size_t y = 0; y < j.states(); ++y) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y)) = row[y];
  }
  return m;
}

double spectral_norm(const DenseMatrix& a, double tolerance) {
  if (a.size() == 0) return 0.0;
  const DenseMatrix gram = a.transpose() * a;
  if (gram.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigen::VectorXd v(gram.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = gram * v;
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (std::abs(next - lambda) <= tolerance * std::abs(next)) return std::sqrt(std::max(next, 0.0));
    lambda = next;
  }
  throw NonConvergence("spectral norm power iteration did not converge", 0.0);
}

NormError operator_norm_error(const JumpMatrix& j, const RateMatrixSequence& seq, std::size_t l) {
  if (l >= j.blocks()) throw std::out_of_range("block index out of range");
  const auto& grid = j.grid();
  const DenseMatrix diff =
      reconstructed_propagator_matrix(j, l) - exact_propagator(seq, grid.start(), grid.upper(l));
  return {spectral_norm(diff), diff.norm()};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceStudy convergence_study(const GridSequenceBuilder& builder, double t0, double t1,
                                   const std::vector<double>& switch_times, const std::vector<double>& dt_list) {
  if (dt_list.empty()) throw std::invalid_argument("empty dt list");
  const auto aligned = [](double length, double dt) {
    const double cells = length / dt;
    return std::abs(cells - std::round(cells)) <= 1e-9 * std::max(1.0, cells) && std::round(cells) >= 1.0;
  };
  ConvergenceStudy out;
  for (std::size_t r = 0; r < dt_list.size(); ++r) {
    const double dt = dt_list[r];
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (r > 0 && !(dt < dt_list[r - 1])) throw std::invalid_argument("dt list must be strictly descending");
    if (!aligned(t1 - t0, dt)) throw std::invalid_argument("dt " + std::to_string(dt) + " does not tile the horizon");
    for (double ts : switch_times)
      if (ts > t0 && ts < t1 && !aligned(ts - t0, dt))
        throw std::invalid_argument("dt " + std::to_string(dt) + " misaligned with switch time " + std::to_string(ts));
    const auto cells = static_cast<std::size_t>(std::round((t1 - t0) / dt));
    const auto seq = builder(TimeGrid::uniform(t0, t1, cells));
    const auto j = assemble(seq);
    out.rows.push_back({dt, cells, j.nnz(), operator_norm_error(j, seq, cells - 1)});
  }
  std::vector<double> xs, ys;
  for (const auto& row : out.rows) {
    xs.push_back(row.dt);
    ys.push_back(row.error.spectral);
  }
  for (std::size_t r = 1; r < out.rows.size(); ++r)
    if (!(ys[r] < ys[r - 1])) out.monotone = false;
  if (out.rows.size() >= 2 && std::all_of(ys.begin(), ys.end(), [](double e) { return e > 0.0; }))
    out.slope = loglog_slope(xs, ys);
  return out;
}

}  // namespace ajc
