#pragma once

// Distances between measures and the tail functionals of step functions.
// Arguments on different (compatible) partitions are aligned on their common
// refinement; incompatible ones raise PartitionMismatch.

#include <string>
#include <vector>

#include "fatou/field.hpp"
#include "fatou/sequence.hpp"

namespace fatou {

/// A finite family of named test sets.
class TestSetFamily {
 public:
  struct Member {
    std::string label;
    CellSet set;
  };

  TestSetFamily() = default;

  /// Every dyadic interval of level <= max_level, optionally with complements.
  static TestSetFamily dyadic_intervals(unsigned max_level, bool with_complements = true);
  /// Every singleton of an atom set, optionally with complements.
  static TestSetFamily singletons(const CellPartition& atoms, bool with_complements = true);

  void add(std::string label, CellSet set);
  /// Throws std::out_of_range for an index outside `reference`.
  void add_indices(std::string label, const CellPartition& reference,
                   const std::vector<Integer>& cells);

  const std::vector<Member>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

 private:
  std::vector<Member> members_;
};

/// sum over cells of |m(c) - v(c)|
Rational tv_distance(const Measure& m, const Measure& v);
Rational tv_distance(const SignedMeasure& m, const SignedMeasure& v);

/// max over members S of |m(S) - v(S)|; 0 for an empty family.
Rational setwise_gap(const Measure& m, const Measure& v, const TestSetFamily& family);

/// m({g <= f - eps}); eps must be positive.
Rational exceedance_measure(const StepFunction& f, const StepFunction& g, const Measure& m,
                            const Rational& eps);

/// integral of f * 1{f <= -K} dm; K must be positive.
Rational lower_tail(const StepFunction& f, const Measure& m, const Rational& K);

/// integral of |f| * 1{|f| >= K} dm; K must be positive.
Rational ui_tail(const StepFunction& f, const Measure& m, const Rational& K);

/// integral of |f - g| dm
Rational l1_distance(const StepFunction& f, const StepFunction& g, const Measure& m);

/// mu({|f_n - f| >= eps}) for the available n <= prefix, where (mu, f) is the
/// limit pair.
Trace convergence_in_measure_prefix(const SequencePair& seq, const Rational& eps,
                                    std::int64_t prefix);

}  // namespace fatou
