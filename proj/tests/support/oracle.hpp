#pragma once

// Independent reference computations on explicit per-cell vectors. Nothing
// here calls the closed forms under test; objects are only flattened.

#include <cstdint>
#include <vector>

#include "fatou/field.hpp"
#include "fatou/partition.hpp"

namespace oracle {

using fatou::Rational;

/// Values / masses of up to four objects on their common refinement.
struct Flat {
  fatou::CellPartition partition;
  std::vector<Rational> f, m, g, v;
};

inline fatou::CellPartition refine(const fatou::CellPartition& a, const fatou::CellPartition& b) {
  return fatou::common_refinement(a, b).partition;
}

inline Flat flatten(const fatou::StepFunction& f, const fatou::Measure& m, const fatou::StepFunction& g,
                    const fatou::Measure& v) {
  auto p = refine(refine(f.partition(), m.partition()), refine(g.partition(), v.partition()));
  return {p, f.lift(p).values(), m.lift(p).masses(), g.lift(p).values(), v.lift(p).masses()};
}

inline std::vector<Rational> deltas(const Flat& x) {
  std::vector<Rational> d;
  for (std::size_t c = 0; c < x.f.size(); ++c) d.push_back(x.g[c] * x.v[c] - x.f[c] * x.m[c]);
  return d;
}

/// Sum of d over the cells selected by mask.
inline Rational masked_sum(const std::vector<Rational>& d, std::uint64_t mask) {
  Rational s;
  for (std::size_t c = 0; c < d.size(); ++c)
    if ((mask >> c) & 1U) s += d[c];
  return s;
}

/// inf over all subsets S of sum_{c in S} d[c], by enumeration.
inline Rational subset_inf(const std::vector<Rational>& d) {
  Rational best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d.size()); ++mask) {
    const Rational s = masked_sum(d, mask);
    if (s < best) best = s;
  }
  return best;
}

/// sup over all subsets S of |sum_{c in S} d[c]|, by enumeration.
inline Rational subset_sup_abs(const std::vector<Rational>& d) {
  Rational best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d.size()); ++mask) {
    const Rational s = masked_sum(d, mask).abs();
    if (s > best) best = s;
  }
  return best;
}

/// sup over sign vectors s of |sum s_c d[c]|.
inline Rational sign_sup(const std::vector<Rational>& d) {
  Rational best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d.size()); ++mask) {
    Rational s;
    for (std::size_t c = 0; c < d.size(); ++c) s += ((mask >> c) & 1U) ? d[c] : -d[c];
    if (s.abs() > best) best = s.abs();
  }
  return best;
}

/// sum of value * mass over cells where keep(value, cell) holds.
template <class Keep>
Rational restricted_integral(const std::vector<Rational>& values, const std::vector<Rational>& masses, Keep keep) {
  Rational s;
  for (std::size_t c = 0; c < values.size(); ++c)
    if (keep(values[c], c)) s += values[c] * masses[c];
  return s;
}

inline Rational pow2(int e) { return Rational::pow2(e); }

/// Level-n densities 1/n on even cells and 2 - 1/n on odd cells.
inline Rational oscillating_density(std::int64_t n, std::uint64_t cell) {
  const Rational inv(1, n);
  return cell % 2 == 0 ? inv : Rational(2) - inv;
}

inline std::vector<Rational> oscillating_masses(std::int64_t n) {
  std::vector<Rational> out;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c)
    out.push_back(oscillating_density(n, c) * pow2(-static_cast<int>(n)));
  return out;
}

}  // namespace oracle
