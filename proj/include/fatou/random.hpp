#pragma once

// Seeded generators for randomized checks. Integer draws use plain modulo
// reduction of mt19937_64 output so that a seed gives the same instances on
// every platform.

#include <cstddef>
#include <cstdint>
#include <random>

#include "fatou/field.hpp"

namespace fatou::random {

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi);

/// p/q with |p| <= max_abs and 1 <= q <= max_den.
Rational small_rational(std::mt19937_64& rng, std::int64_t max_abs = 6, std::int64_t max_den = 4);
/// Nonnegative, zero about one time in five.
Rational small_mass(std::mt19937_64& rng);

/// Dyadic partition (random splits) or atom set with 1..max_cells cells.
CellPartition partition(std::mt19937_64& rng, std::size_t max_cells);
/// A partition refined by p, obtained by merging random sibling cells.
/// Atom sets are returned unchanged.
CellPartition coarsening(std::mt19937_64& rng, const CellPartition& p);

StepFunction step_function(std::mt19937_64& rng, const CellPartition& p);
Measure measure(std::mt19937_64& rng, const CellPartition& p);
SignedMeasure signed_measure(std::mt19937_64& rng, const CellPartition& p);

/// (f, m) on one partition and (g, v) on a coarsening, so that the common
/// refinement has at most max_cells cells.
struct Instance {
  StepFunction f;
  Measure m;
  StepFunction g;
  Measure v;
};
Instance instance(std::mt19937_64& rng, std::size_t max_cells);

}  // namespace fatou::random
