#pragma once

// Helpers shared by the unit tests: random generators and an independent
// quadrature of the jump kernel.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "ajc/generator.hpp"
#include "ajc/jumpchain.hpp"
#include "ajc/random.hpp"

namespace ajc::test_support {

/// Random generator sequence on `cells` uniform cells of [0, horizon]. Each
/// off-diagonal rate is present with probability `density` and drawn from
/// [0, max_rate); some rows are made absorbing on some cells.
inline RateMatrixSequence random_sequence(std::size_t n, std::size_t cells, std::uint64_t seed,
                                          double density = 0.6, double max_rate = 2.0, double horizon = 2.0) {
  Rng rng(seed);
  std::vector<SparseRateMatrix> mats;
  for (std::size_t k = 0; k < cells; ++k) {
    std::vector<RateEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
      const bool absorbing = rng.uniform() < 0.1;
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !absorbing && rng.uniform() < density) entries.push_back({i, j, max_rate * rng.uniform()});
    }
    mats.push_back(SparseRateMatrix::from_off_diagonal(n, std::move(entries)));
  }
  return RateMatrixSequence(TimeGrid::uniform(0.0, horizon, cells), std::move(mats));
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    double z = std::cos(std::numbers::pi * (r + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(r)] = z;
    w[static_cast<std::size_t>(r)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// (1 / dT_k) int_{T_k} ds int_{T_l, t > s} kernel_density(i, s, j, t) dt by
/// tensor Gauss-Legendre quadrature.
inline double quadrature_entry(const RateMatrixSequence& seq, std::size_t i, std::size_t k, std::size_t j,
                               std::size_t l, int order = 40) {
  if (l < k) return 0.0;
  const auto& g = seq.grid();
  const auto [x, w] = gauss_legendre(order);
  const double a = g.lower(k), b = g.upper(k);
  double total = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double s = 0.5 * (a + b) + 0.5 * (b - a) * x[p];
    const double lo = std::max(s, g.lower(l)), hi = g.upper(l);
    double inner = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) {
      const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[q];
      inner += w[q] * kernel_density(seq, i, s, j, t);
    }
    total += w[p] * 0.5 * (hi - lo) * inner;
  }
  return 0.5 * (b - a) * total / (b - a);
}

}  // namespace ajc::test_support
