#pragma once

// Committors for space-time sets and a forward-coherence check.
//
// A cell (i, k) in A or B is observed at the right edge of block k: the
// process hits it when it is in state i at time t_{k+1}. The committor
// c(i, k) is the probability, for a jump into i uniformly distributed in
// T_k, that the first set cell observed is in A. The tail policy gives the
// value for paths that reach the end of the grid without observing either
// set. With A = G x {last block} and B = G^c x {last block} this is the
// Koopman operator applied to the indicator of G.

#include <cstddef>
#include <utility>
#include <vector>

#include "ajc/galerkin.hpp"
#include "ajc/operators.hpp"
#include "ajc/spacetime.hpp"

namespace ajc {

class SpaceTimeSet {
 public:
  SpaceTimeSet() = default;
  explicit SpaceTimeSet(SpaceTimeIndexer idx) : idx_(idx), member_(idx.size(), 0) {}

  static SpaceTimeSet from_cells(SpaceTimeIndexer idx,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& cells);
  /// All (state, block) with state in `states` and block in [first, last].
  static SpaceTimeSet rectangle(SpaceTimeIndexer idx, const std::vector<std::size_t>& states,
                                std::size_t first_block, std::size_t last_block);
  static SpaceTimeSet everything(SpaceTimeIndexer idx);

  void insert(std::size_t state, std::size_t block);
  SpaceTimeSet& operator|=(const SpaceTimeSet& other);

  bool contains(std::size_t state, std::size_t block) const { return member_[idx_.flat(state, block)] != 0; }
  bool contains_flat(std::size_t a) const { return member_[a] != 0; }
  bool empty() const;
  std::size_t count() const;
  bool intersects(const SpaceTimeSet& other) const;
  const SpaceTimeIndexer& indexer() const { return idx_; }

 private:
  SpaceTimeIndexer idx_;
  std::vector<char> member_;
};

struct TailPolicy {
  enum class Kind { absorb_to_b, absorb_to_a, value };
  Kind kind = Kind::absorb_to_b;
  double v = 0.0;

  static TailPolicy to_b() { return {Kind::absorb_to_b, 0.0}; }
  static TailPolicy to_a() { return {Kind::absorb_to_a, 1.0}; }
  static TailPolicy fixed(double v);

  double tail_value() const;
};

/// Throws EmptyTarget when A is empty, std::invalid_argument when A and B
/// intersect.
SpaceTimeVector committor_solve(const JumpMatrix& j, const SpaceTimeSet& a, const SpaceTimeSet& b,
                                TailPolicy tail = TailPolicy::to_b(), SolverOptions opts = {});

struct CoherenceDefect {
  double min_slack = 0.0;       // min over C of (J 1_C)_a - 1
  double violation_mass = 0.0;  // sum over C of max(0, 1 - (J 1_C)_a)
  bool coherent() const { return min_slack >= 0.0; }
};

/// Defect of 1_C in J 1_C >= 1_C. With `count_survival` the probability of
/// never jumping again counts as staying in C. Slacks within 1e-12 of zero
/// are snapped to zero.
CoherenceDefect coherence_defect(const JumpMatrix& j, const SpaceTimeSet& c, bool count_survival = false);

}  // namespace ajc
