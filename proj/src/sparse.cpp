#include "ajc/sparse.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ajc {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.back() != col_idx_.size() ||
      col_idx_.size() != values_.size())
    throw std::invalid_argument("inconsistent CSR arrays");
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> ptr(rows + 1, 0), idx;
  std::vector<double> val;
  idx.reserve(t.size());
  val.reserve(t.size());
  for (std::size_t p = 0; p < t.size(); ++p) {
    if (t[p].row >= rows || t[p].col >= cols) throw std::out_of_range("triplet outside the matrix");
    if (p > 0 && t[p].row == t[p - 1].row && t[p].col == t[p - 1].col)
      throw std::invalid_argument("duplicate coordinate (" + std::to_string(t[p].row) + "," +
                                  std::to_string(t[p].col) + ")");
    ++ptr[t[p].row + 1];
    idx.push_back(t[p].col);
    val.push_back(t[p].value);
  }
  for (std::size_t r = 0; r < rows; ++r) ptr[r + 1] += ptr[r];
  return CsrMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

double CsrMatrix::coeff(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<std::size_t> ptr(cols_ + 1, 0);
  for (std::size_t c : col_idx_) ++ptr[c + 1];
  for (std::size_t c = 0; c < cols_; ++c) ptr[c + 1] += ptr[c];
  std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1), idx(nnz());
  std::vector<double> val(nnz());
  // rows visited in order, so each transposed row comes out sorted
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const std::size_t dst = next[col_idx_[p]]++;
      idx[dst] = r;
      val[dst] = values_[p];
    }
  return CsrMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

namespace {

inline double row_dot(const CsrMatrix& a, std::size_t r, std::span<const double> x) {
  double s = 0.0;
  const auto& ptr = a.row_ptr();
  const auto& idx = a.col_idx();
  const auto& val = a.values();
  for (std::size_t p = ptr[r]; p < ptr[r + 1]; ++p) s += val[p] * x[idx[p]];
  return s;
}

void check_dims(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

void multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  check_dims(a, x, y);
  const auto n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) y[static_cast<std::size_t>(r)] = row_dot(a, static_cast<std::size_t>(r), x);
}

namespace serial {

void multiply(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  check_dims(a, x, y);
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = row_dot(a, r, x);
}

}  // namespace serial

}  // namespace ajc
