#include "ajc/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ajc {

namespace {

// Below this q*d the closed forms lose digits to cancellation.
constexpr double kSeriesThreshold = 1e-4;

}  // namespace

double phi(double q, double d) {
  const double x = q * d;
  if (x < kSeriesThreshold) return d * (1.0 - x / 2.0 + x * x / 6.0);
  return -std::expm1(-x) / q;
}

double psi(double q, double d) {
  const double x = q * d;
  if (x < kSeriesThreshold) return d * d * (0.5 - x / 6.0 + x * x / 24.0);
  return (std::expm1(-x) + x) / (q * q);
}

JumpMatrix::JumpMatrix(SpaceTimeIndexer indexer, TimeGrid grid, CsrMatrix rows,
                       std::vector<double> closed_form_survival, double max_cell_hazard)
    : indexer_(indexer), grid_(std::move(grid)), rows_(std::move(rows)),
      closed_survival_(std::move(closed_form_survival)), max_cell_hazard_(max_cell_hazard) {
  if (rows_.rows() != indexer_.size() || rows_.cols() != indexer_.size() ||
      closed_survival_.size() != indexer_.size() || grid_.cells() != indexer_.blocks())
    throw std::invalid_argument("jump matrix dimensions do not match the space-time indexer");
  cols_ = rows_.transposed();
  jump_mass_.resize(indexer_.size());
  for (std::size_t a = 0; a < indexer_.size(); ++a) {
    double s = 0.0;
    for (double v : rows_.row_values(a)) s += v;
    jump_mass_[a] = s;
  }
}

double JumpMatrix::block_survival(std::size_t i, std::size_t k, std::size_t l) const {
  if (l < k) return 1.0;
  const std::size_t a = indexer_.flat(i, k);
  const std::size_t end = (l + 1) * indexer_.states();
  double s = 0.0;
  auto cols = rows_.row_cols(a);
  auto vals = rows_.row_values(a);
  for (std::size_t p = 0; p < cols.size() && cols[p] < end; ++p) s += vals[p];
  return 1.0 - s;
}

std::vector<double> JumpMatrix::block_survival_profile(std::size_t l) const {
  if (l >= blocks()) throw std::out_of_range("block index out of range");
  std::vector<double> out(indexer_.size(), 1.0);
  const auto n = static_cast<std::int64_t>((l + 1) * states());
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    out[ua] = block_survival(indexer_.state(ua), indexer_.block(ua), l);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct AssemblyPlan {
  SpaceTimeIndexer idx;
  std::vector<std::size_t> row_ptr;
};

// Entry counts per row are known from the generator pattern alone.
AssemblyPlan plan(const RateMatrixSequence& seq) {
  const std::size_t n = seq.states(), m = seq.cells();
  AssemblyPlan p{SpaceTimeIndexer(n, m), std::vector<std::size_t>(n * m + 1, 0)};
  // positive[l * n + i]: number of strictly positive rates in row i of Q_l
  std::vector<std::size_t> positive(n * m, 0);
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (double r : seq.matrix(l).row_rates(i))
        if (r > 0.0) ++positive[l * n + i];
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t tail = 0;  // sum over l >= k, built from the last block backwards
    for (std::size_t k = m; k-- > 0;) {
      tail += positive[k * n + i];
      p.row_ptr[p.idx.flat(i, k) + 1] = tail;
    }
  }
  for (std::size_t a = 0; a < n * m; ++a) p.row_ptr[a + 1] += p.row_ptr[a];
  return p;
}

// Writes row (i, k) through `col`/`val` and returns its closed-form survival.
double assemble_row(const RateMatrixSequence& seq, std::size_t i, std::size_t k, std::size_t* col,
                    double* val) {
  const auto& grid = seq.grid();
  const std::size_t n = seq.states(), m = seq.cells();
  const double qk = seq.outbound(i, k);
  const double dk = grid.width(k);
  const double start_factor = phi(qk, dk) / dk;  // survive from uniform start in T_k to t_k
  double hazard_between = 0.0;                   // sum_{k<m<l} q_im dT_m
  for (std::size_t l = k; l < m; ++l) {
    const auto& q = seq.matrix(l);
    const double ql = q.outbound(i);
    auto cols = q.row_cols(i);
    auto rates = q.row_rates(i);
    if (ql > 0.0) {
      // weight multiplying q_ij(l) for every destination j
      double weight;
      if (l == k) {
        weight = psi(qk, dk) / dk;
      } else {
        const double leave = -std::expm1(-ql * grid.width(l));
        weight = start_factor * std::exp(-hazard_between) * leave / ql;
      }
      for (std::size_t p = 0; p < cols.size(); ++p) {
        if (!(rates[p] > 0.0)) continue;
        *col++ = l * n + cols[p];
        *val++ = rates[p] * weight;
      }
    }
    if (l > k) hazard_between += ql * grid.width(l);
  }
  return start_factor * std::exp(-hazard_between);
}

JumpMatrix finish(const RateMatrixSequence& seq, AssemblyPlan p, std::vector<std::size_t> cols,
                  std::vector<double> vals, std::vector<double> surv) {
  const std::size_t size = p.idx.size();
  CsrMatrix rows(size, size, std::move(p.row_ptr), std::move(cols), std::move(vals));
  double hazard = 0.0;
  for (std::size_t k = 0; k < seq.cells(); ++k)
    for (std::size_t i = 0; i < seq.states(); ++i)
      hazard = std::max(hazard, seq.outbound(i, k) * seq.grid().width(k));
  return JumpMatrix(p.idx, seq.grid(), std::move(rows), std::move(surv), hazard);
}

}  // namespace

JumpMatrix assemble(const RateMatrixSequence& seq) {
  AssemblyPlan p = plan(seq);
  const std::size_t size = p.idx.size();
  std::vector<std::size_t> cols(p.row_ptr.back());
  std::vector<double> vals(p.row_ptr.back());
  std::vector<double> surv(size);
  const auto rows = static_cast<std::int64_t>(size);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t a = 0; a < rows; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    surv[ua] = assemble_row(seq, p.idx.state(ua), p.idx.block(ua), cols.data() + p.row_ptr[ua],
                            vals.data() + p.row_ptr[ua]);
  }
  return finish(seq, std::move(p), std::move(cols), std::move(vals), std::move(surv));
}

namespace serial {

JumpMatrix assemble(const RateMatrixSequence& seq) {
  AssemblyPlan p = plan(seq);
  const std::size_t size = p.idx.size();
  std::vector<std::size_t> cols(p.row_ptr.back());
  std::vector<double> vals(p.row_ptr.back());
  std::vector<double> surv(size);
  for (std::size_t a = 0; a < size; ++a)
    surv[a] = assemble_row(seq, p.idx.state(a), p.idx.block(a), cols.data() + p.row_ptr[a],
                           vals.data() + p.row_ptr[a]);
  return finish(seq, std::move(p), std::move(cols), std::move(vals), std::move(surv));
}

}  // namespace serial

RowMass row_mass(const JumpMatrix& j, std::size_t i, std::size_t k) {
  if (i >= j.states() || k >= j.blocks()) throw std::out_of_range("space-time cell out of range");
  const std::size_t a = j.indexer().flat(i, k);
  return {j.jump_mass(a), j.closed_form_survival(a)};
}

// ---------------------------------------------------------------------------

namespace {

void check_vector(const JumpMatrix& j, const SpaceTimeVector& v) {
  if (v.values.size() != j.indexer().size()) throw std::invalid_argument("space-time vector dimension mismatch");
}

}  // namespace

SpaceTimeVector apply_forward(const JumpMatrix& j, const SpaceTimeVector& f) {
  check_vector(j, f);
  SpaceTimeVector out(j.indexer(), f.kind);
  multiply(j.columns(), f.values, out.values);
  return out;
}

SpaceTimeVector apply_adjoint(const JumpMatrix& j, const SpaceTimeVector& g) {
  check_vector(j, g);
  SpaceTimeVector out(j.indexer(), g.kind);
  multiply(j.rows(), g.values, out.values);
  return out;
}

namespace serial {

SpaceTimeVector apply_forward(const JumpMatrix& j, const SpaceTimeVector& f) {
  check_vector(j, f);
  SpaceTimeVector out(j.indexer(), f.kind);
  serial::multiply(j.columns(), f.values, out.values);
  return out;
}

SpaceTimeVector apply_adjoint(const JumpMatrix& j, const SpaceTimeVector& g) {
  check_vector(j, g);
  SpaceTimeVector out(j.indexer(), g.kind);
  serial::multiply(j.rows(), g.values, out.values);
  return out;
}

}  // namespace serial

}  // namespace ajc
