#pragma once

// Cellwise objects over a CellPartition: step functions, finite measures,
// signed measures and cell sets. Measures are stored as densities with
// respect to the base weight (interval length, or 1 per atom), so lifting to
// a finer partition splits mass in proportion to base weight.

#include <span>
#include <utility>
#include <stdexcept>
#include <vector>

#include "fatou/partition.hpp"
#include "fatou/rational.hpp"

namespace fatou {

class CellSet;
class Measure;

namespace detail {

class Field {
 public:
  const CellPartition& partition() const { return partition_; }
  const NodePtr& tree() const { return tree_; }

 protected:
  Field(CellPartition partition, NodePtr tree)
      : partition_(std::move(partition)), tree_(std::move(tree)) {}
  /// Tree with explicit per-cell leaves in left-to-right order.
  static NodePtr tree_from_leaves(const CellPartition& p, std::span<const Rational> leaves);
  std::vector<Rational> leaves() const;
  Rational leaf(const Integer& cell) const;
  NodePtr lifted_tree(const CellPartition& finer) const;

  CellPartition partition_;
  NodePtr tree_;
};

}  // namespace detail

/// Finite-valued function, constant on each cell.
class StepFunction : public detail::Field {
 public:
  static StepFunction constant(const CellPartition& p, const Rational& value);
  static StepFunction from_values(const CellPartition& p, std::span<const Rational> values);
  static StepFunction from_tree(const CellPartition& like, detail::NodePtr tree);

  std::vector<Rational> values() const { return leaves(); }
  Rational value_at(const Integer& cell) const { return leaf(cell); }
  Rational min_value() const;
  Rational max_value() const;
  Rational max_abs() const;

  StepFunction lift(const CellPartition& finer) const;

  StepFunction operator-() const;
  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator-(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator*(const StepFunction& a, const StepFunction& b);

  /// Same partition and same value in every cell.
  friend bool operator==(const StepFunction& a, const StepFunction& b);

 private:
  StepFunction(CellPartition p, detail::NodePtr t) : Field(std::move(p), std::move(t)) {}
};

StepFunction pos_part(const StepFunction& f);
StepFunction neg_part(const StepFunction& f);
StepFunction abs(const StepFunction& f);
/// Cellwise min / max on the common refinement.
StepFunction cell_min(const StepFunction& a, const StepFunction& b);
StepFunction cell_max(const StepFunction& a, const StepFunction& b);

class SignedMeasure;

/// Finite nonnegative measure on the cell algebra.
class Measure : public detail::Field {
 public:
  /// Lebesgue measure for dyadic partitions, counting measure for atoms.
  static Measure base(const CellPartition& p);
  /// Throws std::invalid_argument on a negative mass.
  static Measure from_masses(const CellPartition& p, std::span<const Rational> masses);
  /// mass(c) = density(c) * base_weight(c); density must be nonnegative.
  static Measure from_density(const StepFunction& density);
  /// S -> integral over S of g d(base); g must be nonnegative.
  static Measure with_density(const Measure& base, const StepFunction& g);

  std::vector<Rational> masses() const;
  Rational mass_at(const Integer& cell) const;
  Rational total_mass() const;
  Rational measure_of(const CellSet& set) const;
  /// Density with respect to the base weight.
  StepFunction density() const;

  Measure lift(const CellPartition& finer) const;
  SignedMeasure as_signed() const;

  friend bool operator==(const Measure& a, const Measure& b);

 private:
  Measure(CellPartition p, detail::NodePtr t) : Field(std::move(p), std::move(t)) {}
  friend class SignedMeasure;
};

/// Finite signed measure on the cell algebra.
class SignedMeasure : public detail::Field {
 public:
  static SignedMeasure from_masses(const CellPartition& p, std::span<const Rational> masses);
  static SignedMeasure from_density(const StepFunction& density);
  /// S -> integral over S of rho dm.
  static SignedMeasure with_density(const Measure& m, const StepFunction& rho);

  std::vector<Rational> masses() const;
  Rational mass_at(const Integer& cell) const;
  Rational total_mass() const;
  Rational measure_of(const CellSet& set) const;
  StepFunction density() const;

  /// Jordan decomposition.
  Measure positive_part() const;
  Measure negative_part() const;
  /// |t| = t+ + t-
  Measure variation() const;

  SignedMeasure lift(const CellPartition& finer) const;
  SignedMeasure operator-() const;

  friend bool operator==(const SignedMeasure& a, const SignedMeasure& b);

 private:
  SignedMeasure(CellPartition p, detail::NodePtr t) : Field(std::move(p), std::move(t)) {}
  friend class Measure;
};

/// Set of cells, stored as a 0/1 indicator so that huge partitions stay compact.
class CellSet : public detail::Field {
 public:
  static CellSet none(const CellPartition& p);
  static CellSet all(const CellPartition& p);
  /// Throws std::out_of_range on an index outside the partition.
  static CellSet from_indices(const CellPartition& p, std::span<const Integer> cells);
  /// One dyadic interval, as a cell of the coarsest dyadic partition having it as a cell.
  static CellSet dyadic_interval(const DyadicInterval& interval);
  static CellSet from_indicator(const StepFunction& indicator);

  Integer count() const;
  /// Sum of base weights of the member cells.
  Rational base_measure() const;
  std::vector<Integer> indices() const;
  bool contains(const Integer& cell) const { return !leaf(cell).is_zero(); }
  StepFunction indicator() const;

  CellSet complement() const;
  CellSet lift(const CellPartition& finer) const;
  friend CellSet operator|(const CellSet& a, const CellSet& b);
  friend CellSet operator&(const CellSet& a, const CellSet& b);

  /// Same point set (compared on the common refinement).
  friend bool operator==(const CellSet& a, const CellSet& b);

 private:
  CellSet(CellPartition p, detail::NodePtr t) : Field(std::move(p), std::move(t)) {}
};

/// Sum over cells of value * mass. f and m must share a partition.
Rational integrate(const StepFunction& f, const Measure& m);
Rational integrate(const StepFunction& f, const SignedMeasure& m);

enum class Compare { LessEqual, Less, GreaterEqual, Greater };

bool compare(const Rational& value, Compare op, const Rational& threshold);

/// Cells whose value satisfies `value op threshold`.
CellSet sublevel_cells(const StepFunction& f, Compare op, const Rational& threshold);

}  // namespace fatou
