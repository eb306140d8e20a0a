#include "fatou/partition.hpp"

#include <algorithm>
#include <set>

namespace fatou {

namespace {

using detail::NodePtr;

std::shared_ptr<const std::vector<std::string>> no_labels() {
  static const auto empty = std::make_shared<const std::vector<std::string>>();
  return empty;
}

// Builds the tree for the sub-range [begin, end) of sorted cells that must tile
// the dyadic interval `at`.
NodePtr build_dyadic(std::span<const DyadicInterval> cells, std::size_t& pos,
                     const DyadicInterval& at) {
  if (pos >= cells.size()) {
    throw std::invalid_argument("dyadic cells do not cover " + at.str());
  }
  const DyadicInterval& c = cells[pos];
  if (c == at) {
    ++pos;
    return detail::make_leaf(Rational());
  }
  if (!at.contains(c) || at.level >= kMaxDyadicLevel) {
    throw std::invalid_argument("dyadic cells overlap or leave a gap near " + c.str());
  }
  NodePtr lo = build_dyadic(cells, pos, DyadicInterval(at.index * 2, at.level + 1));
  NodePtr hi = build_dyadic(cells, pos, DyadicInterval(at.index * 2 + 1, at.level + 1));
  return detail::make_split(std::move(lo), std::move(hi));
}

}  // namespace

DyadicInterval::DyadicInterval(std::uint64_t index, unsigned level) : index(index), level(level) {
  if (level > kMaxDyadicLevel) {
    throw std::invalid_argument("dyadic level " + std::to_string(level) + " exceeds " +
                                std::to_string(kMaxDyadicLevel));
  }
  if (level < 64 && index >= (std::uint64_t{1} << level)) {
    throw std::invalid_argument("dyadic index " + std::to_string(index) +
                                " out of range at level " + std::to_string(level));
  }
}

Rational DyadicInterval::left() const { return Rational(index) * length(); }

Rational DyadicInterval::right() const { return (Rational(index) + 1) * length(); }

bool DyadicInterval::contains(const DyadicInterval& other) const {
  if (other.level < level) return false;
  const unsigned shift = other.level - level;
  const std::uint64_t ancestor = shift >= 64 ? 0 : other.index >> shift;
  return ancestor == index;
}

std::string DyadicInterval::str() const {
  return "[" + left().str() + ", " + right().str() + ")";
}

std::strong_ordering operator<=>(const DyadicInterval& a, const DyadicInterval& b) {
  if (auto c = a.left() <=> b.left(); c != 0) return c;
  return a.level <=> b.level;
}

CellPartition CellPartition::dyadic_uniform(unsigned level) {
  if (level > kMaxDyadicLevel) {
    throw std::invalid_argument("dyadic level " + std::to_string(level) + " exceeds " +
                                std::to_string(kMaxDyadicLevel));
  }
  return CellPartition(PartitionKind::DyadicUnitInterval, no_labels(),
                       detail::uniform(level, Rational()));
}

CellPartition CellPartition::dyadic(std::span<const DyadicInterval> cells) {
  if (cells.empty()) throw std::invalid_argument("partition must be nonempty");
  std::vector<DyadicInterval> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t pos = 0;
  NodePtr root = build_dyadic(sorted, pos, DyadicInterval(0, 0));
  if (pos != sorted.size()) {
    throw std::invalid_argument("dyadic cells overlap near " + sorted[pos].str());
  }
  return CellPartition(PartitionKind::DyadicUnitInterval, no_labels(), std::move(root));
}

CellPartition CellPartition::atoms(std::vector<std::string> labels) {
  if (labels.empty()) throw std::invalid_argument("atom set must be nonempty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw std::invalid_argument("duplicate atom label \"" + l + "\"");
  }
  std::vector<NodePtr> kids(labels.size(), detail::make_leaf(Rational()));
  return CellPartition(PartitionKind::AtomSet,
                       std::make_shared<const std::vector<std::string>>(std::move(labels)),
                       detail::make_split(std::move(kids)));
}

CellPartition CellPartition::from_tree(PartitionKind kind,
                                       std::shared_ptr<const std::vector<std::string>> labels,
                                       const detail::NodePtr& tree) {
  return CellPartition(kind, labels ? std::move(labels) : no_labels(), detail::shape_of(tree));
}

Integer CellPartition::cell_count() const { return detail::leaf_count(shape_); }

unsigned CellPartition::max_level() const {
  return kind_ == PartitionKind::AtomSet ? 0 : detail::depth(shape_);
}

std::vector<DyadicInterval> CellPartition::cells() const {
  if (kind_ != PartitionKind::DyadicUnitInterval) {
    throw std::logic_error("cells() is only defined for dyadic partitions");
  }
  const NodePtr roots[] = {shape_};
  std::vector<DyadicInterval> out;
  for (const auto& c : detail::flatten(roots, layout(), kExplicitCellLimit)) {
    out.emplace_back(c.index, c.level);
  }
  return out;
}

const std::vector<std::string>& CellPartition::labels() const { return *labels_; }

DyadicInterval CellPartition::interval(const Integer& cell) const {
  if (kind_ != PartitionKind::DyadicUnitInterval) {
    throw std::logic_error("interval() is only defined for dyadic partitions");
  }
  const auto ref = detail::leaf_at(shape_, cell);
  return DyadicInterval(ref.index, ref.level);
}

Rational CellPartition::base_weight(const Integer& cell) const {
  if (kind_ == PartitionKind::AtomSet) {
    if (cell < 0 || cell >= static_cast<long>(labels_->size())) {
      throw std::out_of_range("atom index " + cell.get_str() + " out of range");
    }
    return Rational(1);
  }
  return interval(cell).length();
}

Integer CellPartition::locate(const DyadicInterval& piece) const {
  if (kind_ != PartitionKind::DyadicUnitInterval) {
    throw std::logic_error("locate() is only defined for dyadic partitions");
  }
  return detail::rank_of(shape_, piece.index, piece.level);
}

std::string CellPartition::describe_cell(const Integer& cell) const {
  if (kind_ == PartitionKind::AtomSet) {
    if (cell < 0 || cell >= static_cast<long>(labels_->size())) {
      throw std::out_of_range("atom index " + cell.get_str() + " out of range");
    }
    return (*labels_)[cell.get_ui()];
  }
  return interval(cell).str();
}

bool CellPartition::compatible_with(const CellPartition& other) const {
  if (kind_ != other.kind_) return false;
  return kind_ == PartitionKind::DyadicUnitInterval || *labels_ == *other.labels_;
}

bool CellPartition::is_refinement_of(const CellPartition& coarser) const {
  return compatible_with(coarser) && detail::refines(shape_, coarser.shape_);
}

bool operator==(const CellPartition& a, const CellPartition& b) {
  return a.compatible_with(b) && detail::same_shape(a.shape_, b.shape_);
}

void require_compatible(const CellPartition& p, const CellPartition& q) {
  if (p.kind() != q.kind()) {
    throw PartitionMismatch("cannot combine a dyadic partition with an atom set");
  }
  if (!p.compatible_with(q)) throw PartitionMismatch("atom sets have different labels");
}

Refinement common_refinement(const CellPartition& p, const CellPartition& q) {
  require_compatible(p, q);
  const NodePtr roots[] = {p.shape(), q.shape()};
  const NodePtr joined = detail::zip_map(roots, [](std::span<const Rational>) { return Rational(); });
  return Refinement{CellPartition::from_tree(p.kind(), p.label_store(), joined), p, q};
}

Integer Refinement::parent_in_first(const Integer& cell) const {
  if (partition.kind() == PartitionKind::AtomSet) return cell;
  return first.locate(partition.interval(cell));
}

Integer Refinement::parent_in_second(const Integer& cell) const {
  if (partition.kind() == PartitionKind::AtomSet) return cell;
  return second.locate(partition.interval(cell));
}

}  // namespace fatou
