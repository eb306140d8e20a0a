#pragma once

// Cell trees. A dyadic partition of [0,1) is a binary tree whose leaves are
// its cells; identical subtrees are shared, so level-64 partitions with a
// periodic cell pattern stay small. An atom set is a root with one leaf per
// atom. Fields (functions, densities, indicators) use the same trees with a
// Rational payload in every leaf.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fatou/kernels.hpp"
#include "fatou/rational.hpp"

namespace fatou::detail {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Rational value;              // leaf payload
  std::vector<NodePtr> kids;   // empty for a leaf

  bool leaf() const { return kids.empty(); }
};

/// Child weight of a split: 1/2 for dyadic halves, 1 for atoms.
enum class Layout { Dyadic, Atoms };

NodePtr make_leaf(Rational value);
NodePtr make_split(std::vector<NodePtr> kids);
NodePtr make_split(NodePtr lo, NodePtr hi);

using LeafFn = std::function<Rational(std::span<const Rational>)>;

/// Builds the common refinement of the input trees. Leaves of a coarser tree
/// are broadcast to every child; each output leaf is fn(aligned leaf values).
/// Throws std::invalid_argument when two splits disagree in arity.
NodePtr zip_map(std::span<const NodePtr> roots, const LeafFn& fn);

/// sum over cells c of the common refinement of weight(c) * fn(values at c),
/// where weight is the base weight (dyadic length, or 1 per atom).
Rational zip_fold(std::span<const NodePtr> roots, Layout layout, const LeafFn& fn,
                  Execution exec = Execution::Parallel);

/// True when every split of `coarse` is matched by a split of `fine`.
bool refines(const NodePtr& fine, const NodePtr& coarse);
bool same_shape(const NodePtr& a, const NodePtr& b);

Integer leaf_count(const NodePtr& root);
unsigned depth(const NodePtr& root);

/// Replaces every leaf payload by zero, keeping the cell structure.
NodePtr shape_of(const NodePtr& root);

/// One explicit cell of a flattened tree: its path (dyadic index and level,
/// or atom position), base weight and the aligned leaf values.
struct FlatCell {
  std::uint64_t index = 0;
  unsigned level = 0;
  Rational weight;
  std::vector<Rational> values;
};

/// Enumerates the common refinement in left-to-right order. Throws
/// std::length_error when it has more than `cap` cells.
std::vector<FlatCell> flatten(std::span<const NodePtr> roots, Layout layout, std::size_t cap);

/// Path (index, level) and payload of the leaf with the given left-to-right rank.
struct LeafRef {
  std::uint64_t index = 0;
  unsigned level = 0;
  Rational value;
};
LeafRef leaf_at(const NodePtr& root, const Integer& rank);

/// Rank of the leaf containing the dyadic interval (index, level). For a
/// level-0 root split (atoms) `index` is the atom position and level is 1.
/// Throws std::out_of_range when the interval straddles several leaves.
Integer rank_of(const NodePtr& root, std::uint64_t index, unsigned level);

/// Rank of the leftmost leaf with a nonzero payload.
std::optional<Integer> first_nonzero_leaf(const NodePtr& root);

/// Tree of a uniform dyadic partition at `level` with leaf payload `value`.
NodePtr uniform(unsigned level, const Rational& value);

/// Uniform tree at `level` whose leaves alternate even/odd payloads.
NodePtr alternating(unsigned level, const Rational& even, const Rational& odd);

}  // namespace fatou::detail
