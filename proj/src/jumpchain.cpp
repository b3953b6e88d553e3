#include "ajc/jumpchain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ajc {

namespace {

void check_interval(const RateMatrixSequence& seq, double s, double t) {
  if (s > t) throw std::invalid_argument("time interval with s > t");
  if (!seq.grid().contains(s) || !seq.grid().contains(t))
    throw std::out_of_range("time outside the generator grid");
}

}  // namespace

double integrated_rate(const RateMatrixSequence& seq, std::size_t i, double s, double t) {
  check_interval(seq, s, t);
  if (s == t) return 0.0;
  const auto& grid = seq.grid();
  double acc = 0.0;
  for (std::size_t k = grid.cell_of(s); k < grid.cells() && grid.lower(k) < t; ++k) {
    const double lo = std::max(s, grid.lower(k));
    const double hi = std::min(t, grid.upper(k));
    if (hi > lo) acc += seq.outbound(i, k) * (hi - lo);
  }
  return acc;
}

double survival(const RateMatrixSequence& seq, std::size_t i, double s, double t) {
  return std::exp(-integrated_rate(seq, i, s, t));
}

double kernel_density(const RateMatrixSequence& seq, std::size_t i, double s, std::size_t j, double t) {
  if (!(s < t)) return 0.0;
  const auto& q = seq.at_time(t);
  const double qi = q.outbound(i);
  if (qi <= 0.0) return 0.0;
  double embedded = 0.0;
  for (const auto& [col, p] : embedded_probabilities(q, i))
    if (col == j) embedded = p;
  return embedded * qi * survival(seq, i, s, t);
}

std::optional<JumpDraw> draw_jump(const RateMatrixSequence& seq, std::size_t i, double s, double u) {
  const auto& grid = seq.grid();
  if (!grid.contains(s)) throw std::out_of_range("jump time draw outside the generator grid");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("uniform draw must lie in [0, 1)");
  const double target = -std::log1p(-u);
  const std::size_t first = grid.cell_of(s);
  if (target == 0.0) return JumpDraw{s, first};
  double acc = 0.0;
  for (std::size_t k = first; k < grid.cells(); ++k) {
    const double q = seq.outbound(i, k);
    if (q <= 0.0) continue;
    const double lo = std::max(s, grid.lower(k));
    const double hazard = q * (grid.upper(k) - lo);
    if (acc + hazard >= target) {
      const double t = std::min(lo + (target - acc) / q, grid.upper(k));
      return JumpDraw{t, k};
    }
    acc += hazard;
  }
  return std::nullopt;
}

std::size_t sample_target(const SparseRateMatrix& q, std::size_t i, double u) {
  const double qi = q.outbound(i);
  if (qi <= 0.0) return i;
  auto cols = q.row_cols(i);
  auto rates = q.row_rates(i);
  const double threshold = u * qi;
  double acc = 0.0;
  std::size_t last = i;
  for (std::size_t p = 0; p < cols.size(); ++p) {
    if (rates[p] <= 0.0) continue;
    acc += rates[p];
    last = cols[p];
    if (threshold < acc) return cols[p];
  }
  return last;
}

TrajectorySample sample_trajectory(const RateMatrixSequence& seq, SpaceTimePoint start, double horizon,
                                   Rng& rng) {
  const auto& grid = seq.grid();
  if (start.state >= seq.states()) throw std::out_of_range("start state out of range");
  if (!grid.contains(start.time) || !grid.contains(horizon) || start.time > horizon)
    throw std::invalid_argument("need t_0 <= start time <= horizon <= t_M");
  TrajectorySample traj{{start}, horizon};
  SpaceTimePoint cur = start;
  for (;;) {
    auto draw = draw_jump(seq, cur.state, cur.time, 1.0 - rng.uniform_open());
    if (!draw || draw->time > horizon || !(draw->time > cur.time)) break;
    cur = {sample_target(seq.matrix(draw->cell), cur.state, rng.uniform()), draw->time};
    traj.points.push_back(cur);
  }
  return traj;
}

TrajectorySample sample_trajectory(const RateMatrixSequence& seq, SpaceTimePoint start, double horizon,
                                   std::uint64_t seed) {
  Rng rng(seed);
  return sample_trajectory(seq, start, horizon, rng);
}

std::size_t path_state_at(const TrajectorySample& traj, double t) {
  if (traj.points.empty()) throw std::invalid_argument("empty trajectory");
  if (t < traj.points.front().time) throw std::out_of_range("time before the first jump time");
  if (t > traj.horizon) throw std::out_of_range("time beyond the trajectory horizon");
  auto it = std::upper_bound(traj.points.begin(), traj.points.end(), t,
                             [](double v, const SpaceTimePoint& p) { return v < p.time; });
  return std::prev(it)->state;
}

// ---------------------------------------------------------------------------

namespace {

void first_jump_chunk(const RateMatrixSequence& seq, std::size_t i, std::size_t k, std::uint64_t n,
                      std::uint64_t seed, const SpaceTimeIndexer& idx, std::vector<std::uint64_t>& counts,
                      std::uint64_t& survived) {
  const auto& grid = seq.grid();
  const double lo = grid.lower(k), width = grid.width(k);
  Rng rng(seed);
  for (std::uint64_t s = 0; s < n; ++s) {
    const double start = lo + width * rng.uniform_open();
    auto draw = draw_jump(seq, i, start, rng.uniform());
    if (!draw) {
      ++survived;
      continue;
    }
    const std::size_t j = sample_target(seq.matrix(draw->cell), i, rng.uniform());
    ++counts[idx.flat(j, draw->cell)];
  }
}

void check_cell(const RateMatrixSequence& seq, std::size_t i, std::size_t k) {
  if (i >= seq.states() || k >= seq.cells()) throw std::out_of_range("space-time cell out of range");
}

}  // namespace

FirstJumpCounts first_jump_counts(const RateMatrixSequence& seq, std::size_t i, std::size_t k,
                                  std::uint64_t samples, std::uint64_t seed) {
  check_cell(seq, i, k);
  const SpaceTimeIndexer idx(seq.states(), seq.cells());
  FirstJumpCounts out{idx, std::vector<std::uint64_t>(idx.size(), 0), 0, samples};
  const auto chunks = static_cast<std::int64_t>((samples + kSampleChunk - 1) / kSampleChunk);
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(idx.size(), 0);
    std::uint64_t local_survived = 0;
#pragma omp for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
      const auto uc = static_cast<std::uint64_t>(c);
      const std::uint64_t n = std::min(kSampleChunk, samples - uc * kSampleChunk);
      first_jump_chunk(seq, i, k, n, stream_seed(seed, uc), idx, local, local_survived);
    }
#pragma omp critical
    {
      for (std::size_t a = 0; a < local.size(); ++a) out.counts[a] += local[a];
      out.survived += local_survived;
    }
  }
  return out;
}

namespace serial {

FirstJumpCounts first_jump_counts(const RateMatrixSequence& seq, std::size_t i, std::size_t k,
                                  std::uint64_t samples, std::uint64_t seed) {
  check_cell(seq, i, k);
  const SpaceTimeIndexer idx(seq.states(), seq.cells());
  FirstJumpCounts out{idx, std::vector<std::uint64_t>(idx.size(), 0), 0, samples};
  for (std::uint64_t c = 0; c * kSampleChunk < samples; ++c) {
    const std::uint64_t n = std::min(kSampleChunk, samples - c * kSampleChunk);
    first_jump_chunk(seq, i, k, n, stream_seed(seed, c), idx, out.counts, out.survived);
  }
  return out;
}

}  // namespace serial

}  // namespace ajc
