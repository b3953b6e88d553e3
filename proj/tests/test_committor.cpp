#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "ajc/committor.hpp"
#include "ajc/errors.hpp"
#include "ajc/presets.hpp"
#include "support.hpp"

using namespace ajc;

namespace {

/// Dense solve of the committor equations straight from their definition.
std::vector<double> dense_committor(const JumpMatrix& j, const SpaceTimeSet& a, const SpaceTimeSet& b, double tail) {
  const auto& idx = j.indexer();
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    const auto i = idx.state(p), k = idx.block(p);
    std::size_t cut = j.blocks() - 1;
    double term = tail;
    for (std::size_t m = k; m < j.blocks(); ++m)
      if (a.contains(i, m) || b.contains(i, m)) {
        cut = m;
        term = a.contains(i, m) ? 1.0 : 0.0;
        break;
      }
    for (std::size_t q = 0; q < idx.size(); ++q)
      if (idx.block(q) <= cut) sys(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) -= j.rows().coeff(p, q);
    rhs(static_cast<Eigen::Index>(p)) = j.block_survival(i, k, cut) * term;
  }
  const Eigen::VectorXd x = sys.partialPivLu().solve(rhs);
  return {x.data(), x.data() + n};
}

SpaceTimeSet random_set(const SpaceTimeIndexer& idx, Rng& rng, double p) {
  SpaceTimeSet s(idx);
  for (std::size_t i = 0; i < idx.states(); ++i)
    for (std::size_t k = 0; k < idx.blocks(); ++k)
      if (rng.uniform() < p) s.insert(i, k);
  return s;
}

SpaceTimeSet minus(const SpaceTimeSet& s, const SpaceTimeSet& t) {
  SpaceTimeSet out(s.indexer());
  for (std::size_t i = 0; i < s.indexer().states(); ++i)
    for (std::size_t k = 0; k < s.indexer().blocks(); ++k)
      if (s.contains(i, k) && !t.contains(i, k)) out.insert(i, k);
  return out;
}

}  // namespace

TEST(SpaceTimeSet, RectangleAndUnion) {
  const SpaceTimeIndexer idx(4, 3);
  auto s = SpaceTimeSet::rectangle(idx, {0, 2}, 1, 2);
  EXPECT_EQ(s.count(), 4u);
  EXPECT_TRUE(s.contains(2, 1));
  EXPECT_FALSE(s.contains(2, 0));
  s |= SpaceTimeSet::from_cells(idx, {{3, 0}});
  EXPECT_EQ(s.count(), 5u);
  EXPECT_THROW(s.insert(4, 0), std::out_of_range);
  EXPECT_EQ(SpaceTimeSet::everything(idx).count(), 12u);
}

TEST(Committor, MatchesKoopmanOfIndicator) {
  for (const auto& seq : {presets::two_state(), presets::triple_well(), test_support::random_sequence(7, 5, 3)}) {
    const auto j = assemble(seq);
    const auto last = j.blocks() - 1;
    std::vector<std::size_t> g_states, rest;
    for (std::size_t i = 0; i < j.states(); ++i) (i % 3 == 0 ? g_states : rest).push_back(i);
    const auto a = SpaceTimeSet::rectangle(j.indexer(), g_states, last, last);
    const auto b = SpaceTimeSet::rectangle(j.indexer(), rest, last, last);
    SpatialVector g(j.states());
    for (std::size_t i : g_states) g[i] = 1.0;
    const auto c = committor_solve(j, a, b);
    const auto k = koopman_solve(j, g, last);
    for (std::size_t p = 0; p < c.values.size(); ++p) EXPECT_NEAR(c.values[p], k.values[p], 1e-10);
  }
}

TEST(Committor, MatchesDenseDefinition) {
  const auto j = assemble(test_support::random_sequence(6, 5, 44, 0.6, 3.0));
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_set(j.indexer(), rng, 0.15);
    if (a.empty()) a.insert(0, 4);
    const auto b = minus(random_set(j.indexer(), rng, 0.15), a);
    for (double tail : {0.0, 0.3, 1.0}) {
      const auto c = committor_solve(j, a, b, TailPolicy::fixed(tail));
      const auto ref = dense_committor(j, a, b, tail);
      for (std::size_t p = 0; p < ref.size(); ++p) EXPECT_NEAR(c.values[p], ref[p], 1e-10);
    }
  }
}

TEST(Committor, ProbabilitiesAndMonotoneInA) {
  const auto j = assemble(test_support::random_sequence(8, 6, 12, 0.5, 2.0));
  Rng rng(3);
  auto a = random_set(j.indexer(), rng, 0.1);
  a.insert(1, 5);
  const auto b = minus(random_set(j.indexer(), rng, 0.1), a);
  auto bigger = a;
  bigger |= minus(random_set(j.indexer(), rng, 0.1), b);
  const auto c = committor_solve(j, a, b);
  const auto c2 = committor_solve(j, bigger, b);
  for (std::size_t p = 0; p < c.values.size(); ++p) {
    EXPECT_GE(c.values[p], -1e-14);
    EXPECT_LE(c.values[p], 1.0 + 1e-14);
    EXPECT_LE(c.values[p], c2.values[p] + 1e-12);
  }
}

TEST(Committor, ComplementDuality) {
  const auto j = assemble(test_support::random_sequence(8, 6, 15, 0.5, 2.0));
  Rng rng(6);
  auto a = random_set(j.indexer(), rng, 0.2);
  a.insert(0, 0);
  auto b = minus(random_set(j.indexer(), rng, 0.2), a);
  b.insert(7, 5);
  const auto ab = committor_solve(j, a, b, TailPolicy::to_b());
  const auto ba = committor_solve(j, b, a, TailPolicy::to_a());
  for (std::size_t p = 0; p < ab.values.size(); ++p) EXPECT_NEAR(ab.values[p] + ba.values[p], 1.0, 1e-12);
}

TEST(Committor, AffineInTailValue) {
  const auto j = assemble(presets::two_state());
  const auto a = SpaceTimeSet::from_cells(j.indexer(), {{presets::kStateB, 2}});
  const SpaceTimeSet b(j.indexer());
  const auto c0 = committor_solve(j, a, b, TailPolicy::fixed(0.0));
  const auto c1 = committor_solve(j, a, b, TailPolicy::fixed(1.0));
  const auto ch = committor_solve(j, a, b, TailPolicy::fixed(0.25));
  for (std::size_t p = 0; p < c0.values.size(); ++p)
    EXPECT_NEAR(ch.values[p], 0.75 * c0.values[p] + 0.25 * c1.values[p], 1e-14);
}

TEST(Committor, TwoStateHitOfBAtEdgeThree) {
  // From A entering uniformly in T_0: P(in B at t = 3) = mean over s of 1 - e^{-(3 - s)}.
  const auto j = assemble(presets::two_state());
  const auto a = SpaceTimeSet::from_cells(j.indexer(), {{presets::kStateB, 2}});
  const auto c = committor_solve(j, a, SpaceTimeSet(j.indexer()));
  const double expected = 1.0 - (std::exp(-2.0) - std::exp(-3.0));
  EXPECT_NEAR(c.at(presets::kStateA, 0), expected, 1e-14);
}

TEST(Committor, Errors) {
  const auto j = assemble(presets::two_state());
  const SpaceTimeSet empty(j.indexer());
  const auto a = SpaceTimeSet::from_cells(j.indexer(), {{0, 3}});
  EXPECT_THROW(committor_solve(j, empty, a), EmptyTarget);
  EXPECT_THROW(committor_solve(j, a, a), std::invalid_argument);
  EXPECT_THROW(committor_solve(j, SpaceTimeSet::everything(SpaceTimeIndexer(3, 8)), empty), std::invalid_argument);
  EXPECT_THROW(TailPolicy::fixed(1.5), std::invalid_argument);
}

TEST(Coherence, FullSetWithSurvivalIsCoherent) {
  const auto j = assemble(test_support::random_sequence(6, 4, 2));
  const auto all = SpaceTimeSet::everything(j.indexer());
  const auto with = coherence_defect(j, all, true);
  EXPECT_TRUE(with.coherent());
  EXPECT_EQ(with.min_slack, 0.0);
  EXPECT_EQ(with.violation_mass, 0.0);
  const auto without = coherence_defect(j, all, false);
  double max_survival = 0.0, total = 0.0;
  for (std::size_t p = 0; p < j.indexer().size(); ++p) {
    max_survival = std::max(max_survival, j.survival_mass(p));
    total += j.survival_mass(p);
  }
  EXPECT_NEAR(without.min_slack, -max_survival, 1e-12);
  EXPECT_NEAR(without.violation_mass, total, 1e-10);
  EXPECT_FALSE(without.coherent());
}

TEST(Coherence, TwoStateAbsorbingPhase) {
  const auto j = assemble(presets::two_state());
  // A is absorbing after t = 4, so {A} x late blocks keeps its mass when survival counts
  const auto late_a = SpaceTimeSet::rectangle(j.indexer(), {presets::kStateA}, 4, 7);
  EXPECT_TRUE(coherence_defect(j, late_a, true).coherent());
  const auto early_a = SpaceTimeSet::rectangle(j.indexer(), {presets::kStateA}, 0, 3);
  const auto d = coherence_defect(j, early_a, true);
  EXPECT_FALSE(d.coherent());
  EXPECT_GT(d.violation_mass, 0.0);
  EXPECT_THROW(coherence_defect(j, SpaceTimeSet(j.indexer())), EmptyTarget);
}
