#include "fatou/random.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fatou::random {

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("empty integer range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

Rational small_rational(std::mt19937_64& rng, std::int64_t max_abs, std::int64_t max_den) {
  const auto num = uniform_int(rng, -max_abs, max_abs);
  const auto den = uniform_int(rng, 1, max_den);
  return Rational(static_cast<long long>(num), static_cast<long long>(den));
}

Rational small_mass(std::mt19937_64& rng) {
  if (uniform_int(rng, 0, 4) == 0) return Rational();
  return Rational(static_cast<long long>(uniform_int(rng, 1, 6)),
                  static_cast<long long>(uniform_int(rng, 1, 4)));
}

CellPartition partition(std::mt19937_64& rng, std::size_t max_cells) {
  if (max_cells == 0) throw std::invalid_argument("max_cells must be >= 1");
  const auto target = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(max_cells)));
  if (uniform_int(rng, 0, 3) == 0) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < target; ++i) labels.push_back("a" + std::to_string(i));
    return CellPartition::atoms(std::move(labels));
  }
  std::vector<DyadicInterval> cells{DyadicInterval(0, 0)};
  while (cells.size() < target) {
    const auto pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(cells.size()) - 1));
    const DyadicInterval c = cells[pick];
    cells[pick] = DyadicInterval(c.index * 2, c.level + 1);
    cells.push_back(DyadicInterval(c.index * 2 + 1, c.level + 1));
  }
  return CellPartition::dyadic(cells);
}

CellPartition coarsening(std::mt19937_64& rng, const CellPartition& p) {
  if (p.kind() == PartitionKind::AtomSet) return p;
  std::vector<DyadicInterval> cells = p.cells();
  const auto attempts = uniform_int(rng, 0, static_cast<std::int64_t>(cells.size()));
  for (std::int64_t a = 0; a < attempts && cells.size() > 1; ++a) {
    const auto pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(cells.size()) - 1));
    const DyadicInterval c = cells[pick];
    if (c.level == 0) continue;
    const DyadicInterval sibling(c.index ^ 1U, c.level);
    auto it = std::find(cells.begin(), cells.end(), sibling);
    if (it == cells.end()) continue;
    cells.erase(it);
    cells.erase(std::find(cells.begin(), cells.end(), c));
    cells.push_back(DyadicInterval(c.index / 2, c.level - 1));
  }
  return CellPartition::dyadic(cells);
}

StepFunction step_function(std::mt19937_64& rng, const CellPartition& p) {
  std::vector<Rational> values(p.cell_count().get_ui());
  for (auto& x : values) x = small_rational(rng);
  return StepFunction::from_values(p, values);
}

Measure measure(std::mt19937_64& rng, const CellPartition& p) {
  std::vector<Rational> masses(p.cell_count().get_ui());
  for (auto& x : masses) x = small_mass(rng);
  return Measure::from_masses(p, masses);
}

SignedMeasure signed_measure(std::mt19937_64& rng, const CellPartition& p) {
  std::vector<Rational> masses(p.cell_count().get_ui());
  for (auto& x : masses) x = small_rational(rng);
  return SignedMeasure::from_masses(p, masses);
}

Instance instance(std::mt19937_64& rng, std::size_t max_cells) {
  const CellPartition p = partition(rng, max_cells);
  const CellPartition q = coarsening(rng, p);
  StepFunction f = step_function(rng, p);
  Measure m = measure(rng, p);
  StepFunction g = step_function(rng, q);
  Measure v = measure(rng, q);
  return Instance{std::move(f), std::move(m), std::move(g), std::move(v)};
}

}  // namespace fatou::random
