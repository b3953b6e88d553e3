#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>

#include "ajc/galerkin.hpp"
#include "ajc/jumpchain.hpp"
#include "ajc/presets.hpp"
#include "support.hpp"

using namespace ajc;
using presets::kStateA;
using presets::kStateB;

TEST(IntegratedRate, PiecewiseConstant) {
  const auto seq = presets::two_state();
  EXPECT_DOUBLE_EQ(integrated_rate(seq, kStateB, 0.0, 6.0), 2.0);
  EXPECT_DOUBLE_EQ(integrated_rate(seq, kStateA, 2.5, 6.0), 1.5);
  EXPECT_DOUBLE_EQ(integrated_rate(seq, kStateA, 3.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(survival(seq, kStateB, 3.0, 5.5), std::exp(-1.5));
}

TEST(KernelDensity, HazardTimesSurvivalTimesTarget) {
  const auto seq = presets::two_state();
  EXPECT_DOUBLE_EQ(kernel_density(seq, kStateA, 1.0, kStateB, 2.5), std::exp(-1.5));
  EXPECT_EQ(kernel_density(seq, kStateA, 1.0, kStateA, 2.5), 0.0);
  EXPECT_EQ(kernel_density(seq, kStateA, 2.5, kStateB, 1.0), 0.0);
  EXPECT_EQ(kernel_density(seq, kStateA, 5.0, kStateB, 6.0), 0.0);
}

TEST(DrawJump, InvertsTheHazard) {
  const auto seq = presets::two_state();
  // B has zero rate before t = 4, rate 1 afterwards: -log(1 - u) = 1 -> t = 5.
  const auto d = draw_jump(seq, kStateB, 0.0, 1.0 - std::exp(-1.0));
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->time, 5.0, 1e-12);
  EXPECT_EQ(d->cell, 4u);
  EXPECT_EQ(sample_jump_time(seq, kStateA, 1.5, 0.0), 1.5);
}

TEST(DrawJump, EmptyPastTheHorizon) {
  const auto seq = presets::two_state();
  EXPECT_FALSE(draw_jump(seq, kStateA, 5.0, 0.3).has_value());
  // cumulative hazard of A from 3 is 1 < -log(1 - 0.9)
  EXPECT_FALSE(draw_jump(seq, kStateA, 3.0, 0.9).has_value());
  EXPECT_THROW(draw_jump(seq, kStateA, 0.0, 1.0), std::invalid_argument);
}

TEST(SampleTarget, Categorical) {
  const auto q = SparseRateMatrix::from_off_diagonal(3, {{0, 1, 1.0}, {0, 2, 3.0}});
  EXPECT_EQ(sample_target(q, 0, 0.0), 1u);
  EXPECT_EQ(sample_target(q, 0, 0.2499), 1u);
  EXPECT_EQ(sample_target(q, 0, 0.2501), 2u);
  EXPECT_EQ(sample_target(q, 0, 0.9999), 2u);
}

TEST(SampleTrajectory, DeterministicAndOrdered) {
  const auto seq = test_support::random_sequence(6, 4, 11);
  const auto a = sample_trajectory(seq, {2, 0.0}, 2.0, 99);
  const auto b = sample_trajectory(seq, {2, 0.0}, 2.0, 99);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t n = 0; n < a.points.size(); ++n) EXPECT_EQ(a.points[n], b.points[n]);
  EXPECT_EQ(a.points.front(), (SpaceTimePoint{2, 0.0}));
  for (std::size_t n = 1; n < a.points.size(); ++n) {
    EXPECT_GT(a.points[n].time, a.points[n - 1].time);
    EXPECT_NE(a.points[n].state, a.points[n - 1].state);
    EXPECT_LE(a.points[n].time, 2.0);
  }
}

TEST(SampleTrajectory, TwoStateShape) {
  const auto seq = presets::two_state();
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto t = sample_trajectory(seq, {kStateA, 0.0}, 8.0, s);
    ASSERT_LE(t.points.size(), 3u);
    if (t.points.size() >= 2) {
      EXPECT_EQ(t.points[1].state, kStateB);
      EXPECT_LE(t.points[1].time, 4.0);
    }
    if (t.points.size() == 3) EXPECT_GT(t.points[2].time, 4.0);
  }
}

TEST(PathStateAt, RightContinuous) {
  TrajectorySample t{{{0, 0.0}, {1, 1.5}, {0, 3.0}}, 4.0};
  EXPECT_EQ(path_state_at(t, 0.0), 0u);
  EXPECT_EQ(path_state_at(t, 1.4999), 0u);
  EXPECT_EQ(path_state_at(t, 1.5), 1u);
  EXPECT_EQ(path_state_at(t, 2.9), 1u);
  EXPECT_EQ(path_state_at(t, 3.0), 0u);
  EXPECT_EQ(path_state_at(t, 4.0), 0u);
}

TEST(FirstJumpCounts, ParallelMatchesSerialForAnyThreadCount) {
  const auto seq = test_support::random_sequence(5, 4, 3);
  const auto ref = serial::first_jump_counts(seq, 1, 1, 20000, 5);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 4}) {
    omp_set_num_threads(threads);
    const auto par = first_jump_counts(seq, 1, 1, 20000, 5);
    EXPECT_EQ(par.counts, ref.counts) << threads;
    EXPECT_EQ(par.survived, ref.survived);
  }
  omp_set_num_threads(saved);
  std::uint64_t total = ref.survived;
  for (auto c : ref.counts) total += c;
  EXPECT_EQ(total, 20000u);
}

TEST(FirstJumpCounts, AgreesWithGalerkinEntries) {
  const auto seq = test_support::random_sequence(4, 3, 21);
  const auto j = assemble(seq);
  const std::uint64_t n = 40000;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto c = first_jump_counts(seq, i, 0, n, 100 + i);
    for (std::size_t a = 0; a < c.indexer.size(); ++a) {
      const double p = j.rows().coeff(c.indexer.flat(i, 0), a);
      const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
      EXPECT_NEAR(static_cast<double>(c.counts[a]) / n, p, 4.0 * sigma + 1e-9);
    }
  }
}
