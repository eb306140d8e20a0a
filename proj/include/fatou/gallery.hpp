#pragma once

// The four counterexample sequences with their closed-form expectations.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fatou/sequence.hpp"

namespace fatou {

/// Moving indicator dips on [0,1): level k = floor(log2 n), cell j = n - 2^k
/// carries 0, every other cell 1; Lebesgue measure. Limit (Lebesgue, 1).
Term typewriter_dips(std::int64_t n);

/// Level-n dyadic cells with densities 1/n (even) and 2 - 1/n (odd) and
/// f_n = -1/density. Limit (Lebesgue, -1). Requires 1 <= n <= 64.
Term inverse_density_unbounded(std::int64_t n);

/// Level-n dyadic cells with densities 1/2 (even) and 3/2 (odd) and
/// f_n = 1/density. Limit (Lebesgue, 1). Requires 1 <= n <= 64.
Term inverse_density_bounded(std::int64_t n);

/// The measures of inverse_density_unbounded with f_n = 1. Limit (Lebesgue, 1).
Term constant_on_oscillating_measure(std::int64_t n);

/// Union of the even-index cells of the level-n dyadic partition.
CellSet even_cells(unsigned level);

struct GalleryEntry {
  std::string id;
  std::string title;
  std::int64_t max_n = 64;
  SequencePair::Generator generator;
  Term limit;
  /// Parameters at which the published values are stated.
  Rational eps;
  Rational K;
  AnalyticTraces base_forms;  // gap, tv and l1 forms
  std::function<ClosedForm(const Rational& eps)> exceedance_form;
  std::function<ClosedForm(const Rational& K)> lower_tail_form;
  ClosedForm lower_tail_inf;

  /// Closed forms for the given grids.
  AnalyticTraces analytic(const std::vector<Rational>& eps_grid,
                          const std::vector<Rational>& K_grid) const;
  /// The sequence with closed forms attached for the given grids.
  SequencePair sequence(const std::vector<Rational>& eps_grid,
                        const std::vector<Rational>& K_grid) const;
};

/// Ids in order: "3.1", "3.2", "3.3", "3.4".
std::vector<std::string> gallery_ids();

/// Throws std::out_of_range for an unknown id. Entries are cross-checked
/// against their closed forms for n = 1..16 on first access and throw
/// std::logic_error on any disagreement.
const GalleryEntry& gallery_entry(std::string_view id);

}  // namespace fatou
