#include "ajc/operators.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ajc/errors.hpp"

namespace ajc {

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using EigenLU = Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>;

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Within-block part of the jump matrix for block k, in local state indices.
// Forward direction stores the transpose so both cases read x = C x + r.
CsrMatrix diagonal_block(const JumpMatrix& j, std::size_t k, DiagonalBlockSolver::Direction dir) {
  const std::size_t n = j.states();
  const std::size_t lo = k * n, hi = (k + 1) * n;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = j.rows().row_cols(lo + i);
    auto vals = j.rows().row_values(lo + i);
    for (std::size_t p = 0; p < cols.size() && cols[p] < hi; ++p) {
      if (dir == DiagonalBlockSolver::Direction::backward)
        t.push_back({i, cols[p] - lo, vals[p]});
      else
        t.push_back({cols[p] - lo, i, vals[p]});
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

struct DiagonalBlockSolver::Impl {
  SolverOptions opts;
  std::vector<CsrMatrix> blocks;
  std::vector<std::unique_ptr<EigenLU>> lu;

  // r - (x - C x), i.e. the defect of x = C x + r
  std::vector<double> defect(std::size_t k, std::span<const double> x, std::span<const double> r) const {
    std::vector<double> cx(x.size());
    serial::multiply(blocks[k], x, cx);
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = r[i] - (x[i] - cx[i]);
    return d;
  }

  void gauss_seidel(std::size_t k, std::span<double> x, std::span<const double> r) const {
    const auto& c = blocks[k];
    const double scale = std::max(1.0, inf_norm(r));
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        double s = r[i];
        auto cols = c.row_cols(i);
        auto vals = c.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p) s += vals[p] * x[cols[p]];
        x[i] = s;
      }
      if (inf_norm(defect(k, x, r)) <= opts.tolerance * scale) return;
    }
    throw NonConvergence("diagonal block " + std::to_string(k) + ": Gauss-Seidel did not converge",
                         inf_norm(defect(k, x, r)) / scale);
  }
};

DiagonalBlockSolver::DiagonalBlockSolver(const JumpMatrix& j, Direction dir, SolverOptions opts)
    : impl_(std::make_unique<Impl>()) {
  impl_->opts = opts;
  const std::size_t n = j.states();
  const bool direct = n <= opts.direct_limit;
  impl_->blocks.reserve(j.blocks());
  impl_->lu.resize(j.blocks());
  for (std::size_t k = 0; k < j.blocks(); ++k) {
    impl_->blocks.push_back(diagonal_block(j, k, dir));
    const auto& c = impl_->blocks.back();
    if (!direct || c.nnz() == 0) continue;
    std::vector<Eigen::Triplet<double, int>> t;
    t.reserve(c.nnz() + n);
    for (std::size_t i = 0; i < n; ++i) {
      t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
      auto cols = c.row_cols(i);
      auto vals = c.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p)
        t.emplace_back(static_cast<int>(i), static_cast<int>(cols[p]), -vals[p]);
    }
    EigenSparse a(static_cast<int>(n), static_cast<int>(n));
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    auto lu = std::make_unique<EigenLU>();
    lu->compute(a);
    if (lu->info() != Eigen::Success)
      throw NonConvergence("diagonal block " + std::to_string(k) + " is singular", std::numeric_limits<double>::infinity());
    impl_->lu[k] = std::move(lu);
  }
}

DiagonalBlockSolver::~DiagonalBlockSolver() = default;
DiagonalBlockSolver::DiagonalBlockSolver(DiagonalBlockSolver&&) noexcept = default;
DiagonalBlockSolver& DiagonalBlockSolver::operator=(DiagonalBlockSolver&&) noexcept = default;

void DiagonalBlockSolver::solve(std::size_t k, std::span<double> rhs) const {
  const auto& c = impl_->blocks.at(k);
  if (rhs.size() != c.rows()) throw std::invalid_argument("block right-hand side dimension mismatch");
  if (c.nnz() == 0) return;
  const std::vector<double> r(rhs.begin(), rhs.end());
  const double scale = std::max(1.0, inf_norm(r));
  if (!impl_->lu[k]) {
    impl_->gauss_seidel(k, rhs, r);
    return;
  }
  const auto n = static_cast<Eigen::Index>(rhs.size());
  Eigen::Map<const Eigen::VectorXd> rv(r.data(), n);
  Eigen::Map<Eigen::VectorXd> x(rhs.data(), n);
  x = impl_->lu[k]->solve(rv);
  // iterative refinement against the sparse block
  for (int step = 0; step < 3; ++step) {
    auto d = impl_->defect(k, rhs, r);
    if (inf_norm(d) <= impl_->opts.tolerance * scale) return;
    Eigen::Map<const Eigen::VectorXd> dv(d.data(), n);
    x += impl_->lu[k]->solve(dv);
  }
  const double res = inf_norm(impl_->defect(k, rhs, r)) / scale;
  if (res > impl_->opts.tolerance)
    throw NonConvergence("diagonal block " + std::to_string(k) + ": residual " + std::to_string(res), res);
}

// ---------------------------------------------------------------------------

ActivityResult jump_activity(const JumpMatrix& j, const SpaceTimeVector& f, ActivityOptions opts) {
  if (f.values.size() != j.indexer().size()) throw std::invalid_argument("space-time vector dimension mismatch");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("activity tolerance must be positive");
  std::size_t max_terms = opts.max_terms;
  if (max_terms == 0) {
    const double bound = 10.0 * static_cast<double>(j.blocks()) * (1.0 + j.max_cell_hazard());
    max_terms = static_cast<std::size_t>(std::min(bound, 1e9));
  }
  const auto l1 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };
  ActivityResult out{SpaceTimeVector(j.indexer(), VectorKind::density, f.values), 0.0, 1};
  SpaceTimeVector term = f;
  double mass = l1(term.values);
  while (mass >= opts.tolerance) {
    if (out.terms >= max_terms)
      throw NonConvergence("jump activity series not converged after " + std::to_string(max_terms) + " terms",
                           mass);
    term = apply_forward(j, term);
    for (std::size_t a = 0; a < term.values.size(); ++a) out.activity.values[a] += term.values[a];
    mass = l1(term.values);
    ++out.terms;
  }
  out.residual = mass;
  return out;
}

SpaceTimeVector activity_solve(const JumpMatrix& j, const SpaceTimeVector& f, SolverOptions opts) {
  if (f.values.size() != j.indexer().size()) throw std::invalid_argument("space-time vector dimension mismatch");
  const DiagonalBlockSolver solver(j, DiagonalBlockSolver::Direction::forward, opts);
  const std::size_t n = j.states();
  SpaceTimeVector a(j.indexer(), VectorKind::density, f.values);
  const auto& cols = j.columns();
  for (std::size_t l = 0; l < j.blocks(); ++l) {
    // inflow from earlier blocks; column rows list sources in ascending order
    const std::size_t first_source_in_block = l * n;
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t jj = 0; jj < nn; ++jj) {
      const std::size_t b = l * n + static_cast<std::size_t>(jj);
      auto src = cols.row_cols(b);
      auto val = cols.row_values(b);
      double s = 0.0;
      for (std::size_t p = 0; p < src.size() && src[p] < first_source_in_block; ++p) s += val[p] * a.values[src[p]];
      a.values[b] += s;
    }
    solver.solve(l, a.block(l));
  }
  return a;
}

SpatialVector synchronize(const JumpMatrix& j, const SpaceTimeVector& activity, std::size_t l) {
  if (activity.values.size() != j.indexer().size())
    throw std::invalid_argument("space-time vector dimension mismatch");
  if (l >= j.blocks()) throw std::out_of_range("block index out of range");
  const auto surv = j.block_survival_profile(l);
  SpatialVector out(j.states());
  for (std::size_t k = 0; k <= l; ++k)
    for (std::size_t i = 0; i < j.states(); ++i) {
      const std::size_t a = j.indexer().flat(i, k);
      out[i] += activity.values[a] * surv[a];
    }
  return out;
}

SpaceTimeVector embed_initial(const JumpMatrix& j, const SpatialVector& fbar) {
  if (fbar.size() != j.states()) throw std::invalid_argument("spatial vector dimension mismatch");
  SpaceTimeVector f(j.indexer(), VectorKind::density);
  std::copy(fbar.values.begin(), fbar.values.end(), f.values.begin());
  return f;
}

SpatialVector reconstruct_propagator(const JumpMatrix& j, const SpatialVector& fbar, std::size_t l,
                                     ActivityMethod method) {
  const auto f = embed_initial(j, fbar);
  if (method == ActivityMethod::series) return synchronize(j, jump_activity(j, f).activity, l);
  return synchronize(j, activity_solve(j, f), l);
}

// ---------------------------------------------------------------------------

namespace {

SpaceTimeVector edge_hitting_solve_upto(const JumpMatrix& j, std::span<const std::size_t> cutoff,
                                        std::span<const double> terminal, std::size_t last_block,
                                        SolverOptions opts) {
  const auto& idx = j.indexer();
  if (cutoff.size() != idx.size() || terminal.size() != idx.size())
    throw std::invalid_argument("edge data dimension mismatch");
  const std::size_t n = j.states();
  for (std::size_t a = 0; a < idx.size() && idx.block(a) <= last_block; ++a)
    if (cutoff[a] < idx.block(a) || cutoff[a] >= j.blocks())
      throw std::invalid_argument("cutoff block must lie between the cell's block and the last block");
  const DiagonalBlockSolver solver(j, DiagonalBlockSolver::Direction::backward, opts);
  SpaceTimeVector c(idx, VectorKind::observable, std::vector<double>(terminal.begin(), terminal.end()));
  const auto& rows = j.rows();
  for (std::size_t k = last_block + 1; k-- > 0;) {
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < nn; ++ii) {
      const std::size_t a = k * n + static_cast<std::size_t>(ii);
      const std::size_t own_end = (k + 1) * n;
      const std::size_t end = (cutoff[a] + 1) * n;
      auto cols = rows.row_cols(a);
      auto vals = rows.row_values(a);
      double later = 0.0, jumped = 0.0;
      for (std::size_t p = 0; p < cols.size() && cols[p] < end; ++p) {
        jumped += vals[p];
        if (cols[p] >= own_end) later += vals[p] * c.values[cols[p]];
      }
      c.values[a] = later + (1.0 - jumped) * terminal[a];
    }
    solver.solve(k, c.block(k));
  }
  return c;
}

}  // namespace

SpaceTimeVector edge_hitting_solve(const JumpMatrix& j, std::span<const std::size_t> cutoff,
                                   std::span<const double> terminal, SolverOptions opts) {
  return edge_hitting_solve_upto(j, cutoff, terminal, j.blocks() - 1, opts);
}

SpaceTimeVector koopman_solve(const JumpMatrix& j, const SpatialVector& g, std::size_t l, SolverOptions opts) {
  if (g.size() != j.states()) throw std::invalid_argument("observable dimension mismatch");
  if (l >= j.blocks()) throw std::out_of_range("terminal block out of range");
  const auto& idx = j.indexer();
  std::vector<std::size_t> cutoff(idx.size());
  std::vector<double> terminal(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    cutoff[a] = std::max(idx.block(a), l);
    terminal[a] = g[idx.state(a)];
  }
  return edge_hitting_solve_upto(j, cutoff, terminal, l, opts);
}

SpaceTimeVector koopman_matrix_column(const JumpMatrix& j, std::size_t y, std::size_t l, SolverOptions opts) {
  if (y >= j.states()) throw std::out_of_range("state index out of range");
  return koopman_solve(j, SpatialVector::unit(j.states(), y), l, opts);
}

}  // namespace ajc
