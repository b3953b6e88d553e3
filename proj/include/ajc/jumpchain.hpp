#pragma once

// The exact (undiscretized) augmented jump chain (Y_n, J_n): transition
// kernel on space-time, survival, jump-time sampling with time-varying
// hazard, and trajectory generation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ajc/generator.hpp"
#include "ajc/random.hpp"
#include "ajc/spacetime.hpp"

namespace ajc {

struct SpaceTimePoint {
  std::size_t state = 0;
  double time = 0.0;

  bool operator==(const SpaceTimePoint&) const = default;
};

/// One realization: (Y_0, J_0), (Y_1, J_1), ... up to `horizon`.
struct TrajectorySample {
  std::vector<SpaceTimePoint> points;
  double horizon = 0.0;
};

/// int_s^t q_i(u) du. Requires s <= t inside the grid.
double integrated_rate(const RateMatrixSequence& seq, std::size_t i, double s, double t);

/// S(i, s, t) = exp(-int_s^t q_i).
double survival(const RateMatrixSequence& seq, std::size_t i, double s, double t);

/// Density of the next jump landing in state j at time t, having jumped into
/// i at time s. Zero for s >= t.
double kernel_density(const RateMatrixSequence& seq, std::size_t i, double s, std::size_t j,
                      double t);

struct JumpDraw {
  double time;
  std::size_t cell;  // time cell whose (positive) rate produced the jump
};

/// Inverse-CDF draw of the next jump time from state i at time s with the
/// non-homogeneous exponential law: solves int_s^t q_i = -log(1 - u).
/// Empty when the hazard does not accumulate before the end of the grid.
std::optional<JumpDraw> draw_jump(const RateMatrixSequence& seq, std::size_t i, double s, double u);

inline std::optional<double> sample_jump_time(const RateMatrixSequence& seq, std::size_t i, double s,
                                              double u) {
  auto d = draw_jump(seq, i, s, u);
  if (!d) return std::nullopt;
  return d->time;
}

/// Categorical draw of the jump target from the embedded chain of `q` at
/// state i, using one uniform u in [0, 1).
std::size_t sample_target(const SparseRateMatrix& q, std::size_t i, double u);

/// Temporal Gillespie sampling up to `horizon` (<= end of grid).
TrajectorySample sample_trajectory(const RateMatrixSequence& seq, SpaceTimePoint start, double horizon,
                                   Rng& rng);
TrajectorySample sample_trajectory(const RateMatrixSequence& seq, SpaceTimePoint start, double horizon,
                                   std::uint64_t seed);

/// X_t = Y_{c(t)} with c(t) = max{n : J_n <= t}.
std::size_t path_state_at(const TrajectorySample& traj, double t);

/// Histogram of first-jump destinations for particles starting in state i
/// uniformly distributed over time cell k.
struct FirstJumpCounts {
  SpaceTimeIndexer indexer;
  std::vector<std::uint64_t> counts;  // per destination cell
  std::uint64_t survived = 0;         // no jump before the end of the grid
  std::uint64_t samples = 0;
};

inline constexpr std::uint64_t kSampleChunk = 4096;

/// OpenMP-parallel over fixed chunks of kSampleChunk draws; chunk c uses the
/// substream stream_seed(seed, c), so the counts do not depend on the thread
/// count.
FirstJumpCounts first_jump_counts(const RateMatrixSequence& seq, std::size_t i, std::size_t k,
                                  std::uint64_t samples, std::uint64_t seed);

namespace serial {
FirstJumpCounts first_jump_counts(const RateMatrixSequence& seq, std::size_t i, std::size_t k,
                                  std::uint64_t samples, std::uint64_t seed);
}  // namespace serial

}  // namespace ajc
