#pragma once

// Built-in problem setups.
//
// two-state: states {A=0, B=1} on [0, 8]. A -> B at rate 1 before t = 4
// (B absorbing), B -> A at rate 1 afterwards (A absorbing).
//
// triple-well: SQRA generator of a three-well potential on a 9 x 7 grid
// over [-2, 2] x [-1, 2] (h = 0.5), time horizon [0, 2], beta = 1 on
// [0, 1] and beta = 10 on [1, 2].

#include <cstddef>

#include "ajc/generator.hpp"

namespace ajc::presets {

inline constexpr std::size_t kStateA = 0;
inline constexpr std::size_t kStateB = 1;

inline constexpr double kTwoStateHorizon = 8.0;
inline constexpr double kTwoStateSwitch = 4.0;

inline constexpr double kTripleWellHorizon = 2.0;
inline constexpr double kTripleWellSwitch = 1.0;

/// Rate matrix of the two-state model on a cell ending at or before the switch
/// (`first_phase`) or after it.
SparseRateMatrix two_state_matrix(bool first_phase);

/// Two-state model on `cells` uniform cells of [0, 8]. `cells` must be even so
/// the switch at t = 4 falls on an edge.
RateMatrixSequence two_state(std::size_t cells = 8);

/// Two deep wells near (-1, 0) and (1, 0), a shallow one near (0, 1.5),
/// quartic confinement.
double triple_well_potential(double x, double y);

GridPotential triple_well_grid();

inline constexpr double kTripleWellBetaHot = 1.0;
inline constexpr double kTripleWellBetaCold = 10.0;

/// Triple-well annealing protocol on a grid over [0, 2]; every cell must lie
/// entirely on one side of t = 1.
RateMatrixSequence triple_well(const TimeGrid& grid);
RateMatrixSequence triple_well(std::size_t cells = 6);

}  // namespace ajc::presets
