#pragma once

#include "sdm/keyframe.hpp"

namespace sdm {

struct FilterParams {
  int radius = 1;                // window half-size, 1 -> 3x3
  int min_valid_neighbours = 2;
  double gate = 2.0;             // sigma multiplier for compatibility
  double fill_variance_inflation = 2.0;
};

// Fills pixels without a valid hypothesis from their valid window
// neighbours when all of them agree pairwise within the gate. Filled pixels
// get the inverse-variance weighted mean and the inflated harmonic variance,
// plus the FILLED_BY_NEIGHBOUR flag. Blacklisted pixels stay untouched.
// Operates on a snapshot: fills never chain within one pass.
void hole_fill(Keyframe& kf, const FilterParams& params);

// Writes idepth_smoothed / variance_smoothed for every valid pixel as the
// inverse-variance weighted mean over itself and the window neighbours
// compatible with it. Raw fields are never modified.
void smooth(Keyframe& kf, const FilterParams& params);

}  // namespace sdm
