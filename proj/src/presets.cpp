#include "ajc/presets.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <stdexcept>

namespace ajc::presets {

namespace {

// Cells must not straddle a protocol switch.
bool before_switch(double lower, double upper, double t_switch) {
  const double eps = 1e-12 * std::max(1.0, std::abs(t_switch));
  if (upper <= t_switch + eps) return true;
  if (lower >= t_switch - eps) return false;
  throw std::invalid_argument("time cell (" + std::to_string(lower) + ", " + std::to_string(upper) +
                              "] straddles the protocol switch at t = " + std::to_string(t_switch));
}

}  // namespace

SparseRateMatrix two_state_matrix(bool first_phase) {
  if (first_phase) return SparseRateMatrix::from_off_diagonal(2, {{kStateA, kStateB, 1.0}});
  return SparseRateMatrix::from_off_diagonal(2, {{kStateB, kStateA, 1.0}});
}

RateMatrixSequence two_state(std::size_t cells) {
  const auto grid = TimeGrid::uniform(0.0, kTwoStateHorizon, cells);
  return rate_sequence_from_protocol(grid, [](std::size_t, double lo, double hi) {
    return two_state_matrix(before_switch(lo, hi, kTwoStateSwitch));
  });
}

double triple_well_potential(double x, double y) {
  const auto sq = [](double v) { return v * v; };
  return 3.0 * std::exp(-sq(x) - sq(y - 1.0 / 3.0)) - 3.0 * std::exp(-sq(x) - sq(y - 5.0 / 3.0)) -
         5.0 * std::exp(-sq(x - 1.0) - sq(y)) - 5.0 * std::exp(-sq(x + 1.0) - sq(y)) +
         0.2 * sq(sq(x)) + 0.2 * sq(sq(y - 1.0 / 3.0));
}

GridPotential triple_well_grid() {
  return GridPotential::sample(9, 7, -2.0, -1.0, 0.5, triple_well_potential);
}

RateMatrixSequence triple_well(const TimeGrid& grid) {
  const auto potential = triple_well_grid();
  const auto hot = sqra_generator(potential, kTripleWellBetaHot);
  const auto cold = sqra_generator(potential, kTripleWellBetaCold);
  return rate_sequence_from_protocol(grid, [&](std::size_t, double lo, double hi) {
    return before_switch(lo, hi, kTripleWellSwitch) ? hot : cold;
  });
}

RateMatrixSequence triple_well(std::size_t cells) {
  return triple_well(TimeGrid::uniform(0.0, kTripleWellHorizon, cells));
}

}  // namespace ajc::presets
