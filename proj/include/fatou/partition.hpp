#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fatou/detail/tree.hpp"
#include "fatou/rational.hpp"

namespace fatou {

inline constexpr unsigned kMaxDyadicLevel = 64;

/// Explicit per-cell lists (values(), cells(), ...) are refused above this size.
inline constexpr std::size_t kExplicitCellLimit = std::size_t{1} << 20;

/// Thrown when two objects live on partitions that cannot be aligned, or when
/// an operation requires an identical partition and gets a different one.
class PartitionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// [index / 2^level, (index + 1) / 2^level)
struct DyadicInterval {
  std::uint64_t index = 0;
  unsigned level = 0;

  DyadicInterval() = default;
  DyadicInterval(std::uint64_t index, unsigned level);

  Rational left() const;
  Rational right() const;
  Rational length() const { return Rational::pow2(-static_cast<long>(level)); }
  bool contains(const DyadicInterval& other) const;
  std::string str() const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
  /// Orders by left endpoint, then coarser first.
  friend std::strong_ordering operator<=>(const DyadicInterval& a, const DyadicInterval& b);
};

enum class PartitionKind { DyadicUnitInterval, AtomSet };

/// Finite partition of [0,1) into dyadic intervals, or of a finite atom set.
/// Immutable; cheap to copy (shared structure).
class CellPartition {
 public:
  static CellPartition dyadic_uniform(unsigned level);
  /// Cells may come in any order but must tile [0,1) exactly.
  static CellPartition dyadic(std::span<const DyadicInterval> cells);
  static CellPartition atoms(std::vector<std::string> labels);

  /// Internal: partition whose cells are the leaves of `shape`.
  static CellPartition from_tree(PartitionKind kind,
                                 std::shared_ptr<const std::vector<std::string>> labels,
                                 const detail::NodePtr& tree);

  PartitionKind kind() const { return kind_; }
  detail::Layout layout() const {
    return kind_ == PartitionKind::AtomSet ? detail::Layout::Atoms : detail::Layout::Dyadic;
  }
  Integer cell_count() const;
  /// Deepest dyadic level present (0 for atom sets).
  unsigned max_level() const;

  /// Explicit cell list in order. Dyadic only; refused above kExplicitCellLimit.
  std::vector<DyadicInterval> cells() const;
  const std::vector<std::string>& labels() const;

  DyadicInterval interval(const Integer& cell) const;
  Rational base_weight(const Integer& cell) const;
  /// Rank of the cell containing `piece`; throws std::out_of_range when
  /// `piece` straddles several cells.
  Integer locate(const DyadicInterval& piece) const;
  std::string describe_cell(const Integer& cell) const;

  /// Same kind and, for atom sets, identical labels.
  bool compatible_with(const CellPartition& other) const;
  bool is_refinement_of(const CellPartition& coarser) const;

  const detail::NodePtr& shape() const { return shape_; }
  const std::shared_ptr<const std::vector<std::string>>& label_store() const { return labels_; }

  friend bool operator==(const CellPartition& a, const CellPartition& b);

 private:
  CellPartition(PartitionKind kind, std::shared_ptr<const std::vector<std::string>> labels,
                detail::NodePtr shape)
      : kind_(kind), labels_(std::move(labels)), shape_(std::move(shape)) {}

  PartitionKind kind_ = PartitionKind::DyadicUnitInterval;
  std::shared_ptr<const std::vector<std::string>> labels_;
  detail::NodePtr shape_;
};

/// Coarsest common refinement plus the map from its cells back to the parents.
struct Refinement {
  CellPartition partition;
  CellPartition first;
  CellPartition second;

  Integer parent_in_first(const Integer& cell) const;
  Integer parent_in_second(const Integer& cell) const;
};

/// Throws PartitionMismatch for different kinds or different atom labels.
Refinement common_refinement(const CellPartition& p, const CellPartition& q);

/// Throws PartitionMismatch unless the two are compatible.
void require_compatible(const CellPartition& p, const CellPartition& q);

}  // namespace fatou
