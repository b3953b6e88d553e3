#include "ajc/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ajc {

TimeGrid::TimeGrid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw std::invalid_argument("time grid needs at least one cell");
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
    if (!std::isfinite(edges_[k]) || !std::isfinite(edges_[k + 1]) ||
        !(edges_[k + 1] > edges_[k])) {
      throw std::invalid_argument("time grid edges must be finite and strictly increasing (cell " +
                                  std::to_string(k) + ")");
    }
  }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t cells) {
  if (cells == 0) throw std::invalid_argument("time grid needs at least one cell");
  std::vector<double> e(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k)
    e[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(cells);
  e.back() = t1;
  return TimeGrid(std::move(e));
}

std::size_t TimeGrid::cell_of(double t) const {
  if (!contains(t)) throw std::out_of_range("time outside the grid");
  // first edge >= t is the right end of the containing cell
  auto it = std::lower_bound(edges_.begin() + 1, edges_.end(), t);
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

// ---------------------------------------------------------------------------

SparseRateMatrix SparseRateMatrix::from_entries(std::size_t n, std::vector<RateEntry> entries) {
  SparseRateMatrix m;
  m.diagonal_.assign(n, 0.0);
  m.outbound_.assign(n, 0.0);
  std::vector<RateEntry> off;
  off.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= n || e.col >= n) throw std::out_of_range("rate entry index out of range");
    if (e.row == e.col)
      m.diagonal_[e.row] += e.rate;
    else
      off.push_back(e);
  }
  std::sort(off.begin(), off.end(), [](const RateEntry& a, const RateEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t p = 0; p < off.size(); ++p) {
    if (!m.cols_.empty() && p > 0 && off[p].row == off[p - 1].row && off[p].col == off[p - 1].col) {
      m.rates_.back() += off[p].rate;
      continue;
    }
    m.cols_.push_back(off[p].col);
    m.rates_.push_back(off[p].rate);
    ++m.row_ptr_[off[p].row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double r : m.row_rates(i)) s += r;
    m.outbound_[i] = s;
  }
  return m;
}

SparseRateMatrix SparseRateMatrix::from_off_diagonal(std::size_t n, std::vector<RateEntry> entries) {
  std::erase_if(entries, [](const RateEntry& e) { return e.row == e.col; });
  return from_entries(n, std::move(entries)).normalized();
}

SparseRateMatrix SparseRateMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
  std::vector<RateEntry> entries;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw std::invalid_argument("dense rate matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (rows[i][j] != 0.0) entries.push_back({i, j, rows[i][j]});
  }
  return from_entries(rows.size(), std::move(entries));
}

double SparseRateMatrix::rate(std::size_t i, std::size_t j) const {
  if (i == j) return -outbound_[i];
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return row_rates(i)[static_cast<std::size_t>(it - cols.begin())];
}

SparseRateMatrix SparseRateMatrix::normalized() const {
  SparseRateMatrix m = *this;
  for (std::size_t i = 0; i < size(); ++i) m.diagonal_[i] = -m.outbound_[i];
  return m;
}

std::vector<std::vector<double>> SparseRateMatrix::to_dense() const {
  std::vector<std::vector<double>> d(size(), std::vector<double>(size(), 0.0));
  for (std::size_t i = 0; i < size(); ++i) {
    d[i][i] = diagonal_[i];
    auto cols = row_cols(i);
    auto rates = row_rates(i);
    for (std::size_t p = 0; p < cols.size(); ++p) d[i][cols[p]] = rates[p];
  }
  return d;
}

// ---------------------------------------------------------------------------

RateMatrixSequence::RateMatrixSequence(TimeGrid grid, std::vector<SparseRateMatrix> matrices)
    : grid_(std::move(grid)), matrices_(std::move(matrices)) {
  if (matrices_.size() != grid_.cells())
    throw std::invalid_argument("need one rate matrix per time cell");
  for (const auto& m : matrices_)
    if (m.size() != matrices_.front().size())
      throw std::invalid_argument("all rate matrices must share the state dimension");
  if (matrices_.front().size() == 0) throw std::invalid_argument("empty state space");
}

std::string describe(const GeneratorViolation& v) {
  std::ostringstream os;
  os << "matrix " << v.matrix << ": ";
  if (v.kind == GeneratorViolation::Kind::row_sum)
    os << "row " << v.row << " sums to " << v.defect << " (must be 0)";
  else
    os << "negative off-diagonal rate " << v.defect << " at (" << v.row << "," << v.col << ")";
  return os.str();
}

std::vector<GeneratorViolation> validate_generator(const SparseRateMatrix& q, std::size_t index) {
  std::vector<GeneratorViolation> out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    auto cols = q.row_cols(i);
    auto rates = q.row_rates(i);
    for (std::size_t p = 0; p < cols.size(); ++p)
      if (rates[p] < 0.0 || !std::isfinite(rates[p]))
        out.push_back({GeneratorViolation::Kind::negative_rate, index, i, cols[p], rates[p]});
    const double defect = q.stored_diagonal(i) + q.outbound(i);
    if (!(std::abs(defect) <= kRowSumTolerance * std::max(1.0, q.outbound(i))))
      out.push_back({GeneratorViolation::Kind::row_sum, index, i, i, defect});
  }
  return out;
}

std::vector<GeneratorViolation> validate_generator(const RateMatrixSequence& seq) {
  std::vector<GeneratorViolation> out;
  for (std::size_t k = 0; k < seq.cells(); ++k) {
    auto v = validate_generator(seq.matrix(k), k);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> embedded_probabilities(const SparseRateMatrix& q,
                                                                   std::size_t i) {
  const double qi = q.outbound(i);
  if (qi <= 0.0) return {{i, 1.0}};
  std::vector<std::pair<std::size_t, double>> row;
  auto cols = q.row_cols(i);
  auto rates = q.row_rates(i);
  row.reserve(cols.size());
  for (std::size_t p = 0; p < cols.size(); ++p)
    if (rates[p] > 0.0) row.emplace_back(cols[p], rates[p] / qi);
  return row;
}

// ---------------------------------------------------------------------------

GridPotential GridPotential::sample(std::size_t nx, std::size_t ny, double x0, double y0, double h,
                                    const std::function<double(double, double)>& potential) {
  GridPotential g{nx, ny, h, x0, y0, {}};
  g.values.resize(nx * ny);
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = potential(g.x(i), g.y(i));
  return g;
}

std::vector<std::size_t> GridPotential::neighbors(std::size_t i) const {
  const std::size_t row = i / nx, col = i % nx;
  std::vector<std::size_t> out;
  out.reserve(4);
  if (row > 0) out.push_back(index(row - 1, col));
  if (col > 0) out.push_back(index(row, col - 1));
  if (col + 1 < nx) out.push_back(index(row, col + 1));
  if (row + 1 < ny) out.push_back(index(row + 1, col));
  return out;
}

SparseRateMatrix sqra_generator(const GridPotential& p, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("sqra: beta must be positive");
  if (!(p.h > 0.0)) throw std::invalid_argument("sqra: grid spacing h must be positive");
  if (p.values.size() != p.size()) throw std::invalid_argument("sqra: potential size mismatch");
  const double flat_rate = 1.0 / (beta * p.h * p.h);
  std::vector<RateEntry> entries;
  entries.reserve(4 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j : p.neighbors(i))
      entries.push_back({i, j, flat_rate * std::exp(-0.5 * beta * (p.values[j] - p.values[i]))});
  return SparseRateMatrix::from_off_diagonal(p.size(), std::move(entries));
}

RateMatrixSequence rate_sequence_from_protocol(const TimeGrid& grid, const IntervalBuilder& builder) {
  std::vector<SparseRateMatrix> mats;
  mats.reserve(grid.cells());
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    try {
      mats.push_back(builder(k, grid.lower(k), grid.upper(k)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("protocol builder failed on interval " + std::to_string(k) + ": " +
                                  e.what());
    }
    auto v = validate_generator(mats.back(), k);
    if (!v.empty())
      throw std::invalid_argument("protocol builder produced an invalid generator: " + describe(v.front()));
  }
  return RateMatrixSequence(grid, std::move(mats));
}

}  // namespace ajc
