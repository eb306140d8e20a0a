#include "fatou/field.hpp"

#include <functional>
#include <optional>
#include <unordered_map>

namespace fatou {

namespace {

using detail::NodePtr;

NodePtr zip(std::initializer_list<NodePtr> trees, const detail::LeafFn& fn) {
  const std::vector<NodePtr> roots(trees);
  return detail::zip_map(roots, fn);
}

Rational fold(detail::Layout layout, std::initializer_list<NodePtr> trees,
              const detail::LeafFn& fn) {
  const std::vector<NodePtr> roots(trees);
  return detail::zip_fold(roots, layout, fn);
}

CellPartition joined(const CellPartition& a, const CellPartition& b, const NodePtr& tree) {
  require_compatible(a, b);
  return CellPartition::from_tree(a.kind(), a.label_store(), tree);
}

NodePtr map_leaves(const NodePtr& tree, const std::function<Rational(const Rational&)>& fn) {
  return zip({tree}, [&](std::span<const Rational> v) { return fn(v[0]); });
}

void require_nonnegative(const NodePtr& tree, const char* what) {
  const NodePtr roots[] = {tree};
  // zip_map visits every distinct leaf, so a throwing callback checks them all.
  detail::zip_map(roots, [&](std::span<const Rational> v) {
    if (v[0].sign() < 0) {
      throw std::invalid_argument(std::string(what) + " must be nonnegative, got " + v[0].str());
    }
    return v[0];
  });
}

Rational weight_at(const CellPartition& p, unsigned level) {
  return p.kind() == PartitionKind::AtomSet ? Rational(1)
                                            : Rational::pow2(-static_cast<long>(level));
}

std::vector<Rational> masses_of(const CellPartition& p, const NodePtr& density) {
  const NodePtr roots[] = {density};
  std::vector<Rational> out;
  for (const auto& c : detail::flatten(roots, p.layout(), kExplicitCellLimit)) {
    out.push_back(c.values[0] * c.weight);
  }
  return out;
}

std::vector<Rational> densities_from_masses(const CellPartition& p,
                                            std::span<const Rational> masses) {
  const NodePtr roots[] = {p.shape()};
  const auto cells = detail::flatten(roots, p.layout(), kExplicitCellLimit);
  if (cells.size() != masses.size()) {
    throw std::invalid_argument("expected " + std::to_string(cells.size()) + " masses, got " +
                                std::to_string(masses.size()));
  }
  std::vector<Rational> out;
  out.reserve(masses.size());
  for (std::size_t i = 0; i < masses.size(); ++i) out.push_back(masses[i] / cells[i].weight);
  return out;
}

}  // namespace

namespace detail {

NodePtr Field::tree_from_leaves(const CellPartition& p, std::span<const Rational> leaves) {
  if (Integer(static_cast<unsigned long>(leaves.size())) != p.cell_count()) {
    throw std::invalid_argument("expected " + p.cell_count().get_str() + " cell values, got " +
                                std::to_string(leaves.size()));
  }
  std::size_t pos = 0;
  std::function<NodePtr(const Node*)> rec = [&](const Node* n) -> NodePtr {
    if (n->leaf()) return make_leaf(leaves[pos++]);
    std::vector<NodePtr> kids;
    kids.reserve(n->kids.size());
    for (const auto& k : n->kids) kids.push_back(rec(k.get()));
    return make_split(std::move(kids));
  };
  return rec(p.shape().get());
}

std::vector<Rational> Field::leaves() const {
  const NodePtr roots[] = {tree_};
  std::vector<Rational> out;
  for (auto& c : flatten(roots, partition_.layout(), kExplicitCellLimit)) {
    out.push_back(std::move(c.values[0]));
  }
  return out;
}

Rational Field::leaf(const Integer& cell) const { return leaf_at(tree_, cell).value; }

NodePtr Field::lifted_tree(const CellPartition& finer) const {
  require_compatible(partition_, finer);
  if (!finer.is_refinement_of(partition_)) {
    throw PartitionMismatch("target partition does not refine the source partition");
  }
  return zip({finer.shape(), tree_}, [](std::span<const Rational> v) { return v[1]; });
}

}  // namespace detail

// ---- StepFunction ----

StepFunction StepFunction::constant(const CellPartition& p, const Rational& value) {
  return StepFunction(p, map_leaves(p.shape(), [&](const Rational&) { return value; }));
}

StepFunction StepFunction::from_values(const CellPartition& p, std::span<const Rational> values) {
  return StepFunction(p, tree_from_leaves(p, values));
}

StepFunction StepFunction::from_tree(const CellPartition& like, detail::NodePtr tree) {
  auto p = CellPartition::from_tree(like.kind(), like.label_store(), tree);
  return StepFunction(std::move(p), std::move(tree));
}

Rational StepFunction::min_value() const {
  std::optional<Rational> best;
  const NodePtr roots[] = {tree_};
  detail::zip_map(roots, [&](std::span<const Rational> v) {
    if (!best || v[0] < *best) best = v[0];
    return v[0];
  });
  return *best;
}

Rational StepFunction::max_value() const { return -(-*this).min_value(); }

Rational StepFunction::max_abs() const { return abs(*this).max_value(); }

StepFunction StepFunction::lift(const CellPartition& finer) const {
  return StepFunction(finer, lifted_tree(finer));
}

StepFunction StepFunction::operator-() const {
  return StepFunction(partition_, map_leaves(tree_, [](const Rational& x) { return -x; }));
}

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  auto t = zip({a.tree_, b.tree_}, [](std::span<const Rational> v) { return v[0] + v[1]; });
  return StepFunction(joined(a.partition_, b.partition_, t), t);
}

StepFunction operator-(const StepFunction& a, const StepFunction& b) {
  auto t = zip({a.tree_, b.tree_}, [](std::span<const Rational> v) { return v[0] - v[1]; });
  return StepFunction(joined(a.partition_, b.partition_, t), t);
}

StepFunction operator*(const StepFunction& a, const StepFunction& b) {
  auto t = zip({a.tree_, b.tree_}, [](std::span<const Rational> v) { return v[0] * v[1]; });
  return StepFunction(joined(a.partition_, b.partition_, t), t);
}

bool operator==(const StepFunction& a, const StepFunction& b) {
  if (!(a.partition_ == b.partition_)) return false;
  return fold(a.partition_.layout(), {a.tree_, b.tree_}, [](std::span<const Rational> v) {
           return v[0] == v[1] ? Rational() : Rational(1);
         }).is_zero();
}

StepFunction pos_part(const StepFunction& f) {
  return StepFunction::from_tree(f.partition(),
                                 map_leaves(f.tree(), [](const Rational& x) { return x.positive_part(); }));
}

StepFunction neg_part(const StepFunction& f) {
  return StepFunction::from_tree(f.partition(),
                                 map_leaves(f.tree(), [](const Rational& x) { return x.negative_part(); }));
}

StepFunction abs(const StepFunction& f) {
  return StepFunction::from_tree(f.partition(),
                                 map_leaves(f.tree(), [](const Rational& x) { return x.abs(); }));
}

StepFunction cell_min(const StepFunction& a, const StepFunction& b) {
  require_compatible(a.partition(), b.partition());
  return StepFunction::from_tree(
      a.partition(), zip({a.tree(), b.tree()}, [](std::span<const Rational> v) { return min(v[0], v[1]); }));
}

StepFunction cell_max(const StepFunction& a, const StepFunction& b) {
  require_compatible(a.partition(), b.partition());
  return StepFunction::from_tree(
      a.partition(), zip({a.tree(), b.tree()}, [](std::span<const Rational> v) { return max(v[0], v[1]); }));
}

// ---- Measure ----

Measure Measure::base(const CellPartition& p) {
  return Measure(p, map_leaves(p.shape(), [](const Rational&) { return Rational(1); }));
}

Measure Measure::from_masses(const CellPartition& p, std::span<const Rational> masses) {
  for (const auto& m : masses) {
    if (m.sign() < 0) throw std::invalid_argument("negative mass " + m.str());
  }
  const auto d = densities_from_masses(p, masses);
  return Measure(p, tree_from_leaves(p, d));
}

Measure Measure::from_density(const StepFunction& density) {
  require_nonnegative(density.tree(), "density");
  return Measure(density.partition(), density.tree());
}

Measure Measure::with_density(const Measure& base, const StepFunction& g) {
  require_nonnegative(g.tree(), "density");
  auto t = zip({base.tree_, g.tree()}, [](std::span<const Rational> v) { return v[0] * v[1]; });
  return Measure(joined(base.partition_, g.partition(), t), t);
}

std::vector<Rational> Measure::masses() const { return masses_of(partition_, tree_); }

Rational Measure::mass_at(const Integer& cell) const {
  const auto ref = detail::leaf_at(tree_, cell);
  return ref.value * weight_at(partition_, ref.level);
}

Rational Measure::total_mass() const {
  return fold(partition_.layout(), {tree_}, [](std::span<const Rational> v) { return v[0]; });
}

Rational Measure::measure_of(const CellSet& set) const {
  require_compatible(partition_, set.partition());
  return fold(partition_.layout(), {tree_, set.tree()},
              [](std::span<const Rational> v) { return v[0] * v[1]; });
}

StepFunction Measure::density() const { return StepFunction::from_tree(partition_, tree_); }

Measure Measure::lift(const CellPartition& finer) const { return Measure(finer, lifted_tree(finer)); }

SignedMeasure Measure::as_signed() const { return SignedMeasure(partition_, tree_); }

bool operator==(const Measure& a, const Measure& b) { return a.density() == b.density(); }

// ---- SignedMeasure ----

SignedMeasure SignedMeasure::from_masses(const CellPartition& p, std::span<const Rational> masses) {
  const auto d = densities_from_masses(p, masses);
  return SignedMeasure(p, tree_from_leaves(p, d));
}

SignedMeasure SignedMeasure::from_density(const StepFunction& density) {
  return SignedMeasure(density.partition(), density.tree());
}

SignedMeasure SignedMeasure::with_density(const Measure& m, const StepFunction& rho) {
  auto t = zip({m.tree_, rho.tree()}, [](std::span<const Rational> v) { return v[0] * v[1]; });
  return SignedMeasure(joined(m.partition_, rho.partition(), t), t);
}

std::vector<Rational> SignedMeasure::masses() const { return masses_of(partition_, tree_); }

Rational SignedMeasure::mass_at(const Integer& cell) const {
  const auto ref = detail::leaf_at(tree_, cell);
  return ref.value * weight_at(partition_, ref.level);
}

Rational SignedMeasure::total_mass() const {
  return fold(partition_.layout(), {tree_}, [](std::span<const Rational> v) { return v[0]; });
}

Rational SignedMeasure::measure_of(const CellSet& set) const {
  require_compatible(partition_, set.partition());
  return fold(partition_.layout(), {tree_, set.tree()},
              [](std::span<const Rational> v) { return v[0] * v[1]; });
}

StepFunction SignedMeasure::density() const { return StepFunction::from_tree(partition_, tree_); }

Measure SignedMeasure::positive_part() const {
  return Measure(partition_, map_leaves(tree_, [](const Rational& x) { return x.positive_part(); }));
}

Measure SignedMeasure::negative_part() const {
  return Measure(partition_, map_leaves(tree_, [](const Rational& x) { return x.negative_part(); }));
}

Measure SignedMeasure::variation() const {
  return Measure(partition_, map_leaves(tree_, [](const Rational& x) { return x.abs(); }));
}

SignedMeasure SignedMeasure::lift(const CellPartition& finer) const {
  return SignedMeasure(finer, lifted_tree(finer));
}

SignedMeasure SignedMeasure::operator-() const {
  return SignedMeasure(partition_, map_leaves(tree_, [](const Rational& x) { return -x; }));
}

bool operator==(const SignedMeasure& a, const SignedMeasure& b) {
  return a.density() == b.density();
}

// ---- CellSet ----

CellSet CellSet::none(const CellPartition& p) {
  return CellSet(p, map_leaves(p.shape(), [](const Rational&) { return Rational(); }));
}

CellSet CellSet::all(const CellPartition& p) {
  return CellSet(p, map_leaves(p.shape(), [](const Rational&) { return Rational(1); }));
}

CellSet CellSet::from_indices(const CellPartition& p, std::span<const Integer> cells) {
  const Integer count = p.cell_count();
  for (const auto& c : cells) {
    if (c < 0 || c >= count) {
      throw std::out_of_range("cell index " + c.get_str() + " outside partition of " +
                              count.get_str() + " cells");
    }
  }
  if (count > Integer(static_cast<unsigned long>(kExplicitCellLimit))) {
    throw std::length_error("explicit index sets need a partition of at most " +
                            std::to_string(kExplicitCellLimit) + " cells");
  }
  std::vector<Rational> ind(count.get_ui());
  for (const auto& c : cells) ind[c.get_ui()] = Rational(1);
  return CellSet(p, tree_from_leaves(p, ind));
}

CellSet CellSet::dyadic_interval(const DyadicInterval& interval) {
  NodePtr node = detail::make_leaf(Rational(1));
  const NodePtr off = detail::make_leaf(Rational());
  for (unsigned l = interval.level; l > 0; --l) {
    const bool upper = ((interval.index >> (interval.level - l)) & 1U) != 0;
    node = upper ? detail::make_split(off, node) : detail::make_split(node, off);
  }
  auto p = CellPartition::from_tree(PartitionKind::DyadicUnitInterval, nullptr, node);
  return CellSet(std::move(p), std::move(node));
}

CellSet CellSet::from_indicator(const StepFunction& indicator) {
  auto t = map_leaves(indicator.tree(), [](const Rational& x) {
    return x.is_zero() ? Rational() : Rational(1);
  });
  return CellSet(indicator.partition(), std::move(t));
}

Integer CellSet::count() const {
  std::unordered_map<const detail::Node*, Integer> memo;
  std::function<Integer(const detail::Node*)> rec = [&](const detail::Node* n) -> Integer {
    if (n->leaf()) return n->value.is_zero() ? Integer(0) : Integer(1);
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    Integer c = 0;
    for (const auto& k : n->kids) c += rec(k.get());
    memo.emplace(n, c);
    return c;
  };
  return rec(tree_.get());
}

Rational CellSet::base_measure() const {
  return fold(partition_.layout(), {tree_}, [](std::span<const Rational> v) { return v[0]; });
}

std::vector<Integer> CellSet::indices() const {
  std::vector<Integer> out;
  const auto ind = leaves();
  for (std::size_t i = 0; i < ind.size(); ++i) {
    if (!ind[i].is_zero()) out.emplace_back(static_cast<unsigned long>(i));
  }
  return out;
}

StepFunction CellSet::indicator() const { return StepFunction::from_tree(partition_, tree_); }

CellSet CellSet::complement() const {
  return CellSet(partition_, map_leaves(tree_, [](const Rational& x) { return Rational(1) - x; }));
}

CellSet CellSet::lift(const CellPartition& finer) const { return CellSet(finer, lifted_tree(finer)); }

CellSet operator|(const CellSet& a, const CellSet& b) {
  auto t = zip({a.tree_, b.tree_}, [](std::span<const Rational> v) { return max(v[0], v[1]); });
  return CellSet(joined(a.partition_, b.partition_, t), t);
}

CellSet operator&(const CellSet& a, const CellSet& b) {
  auto t = zip({a.tree_, b.tree_}, [](std::span<const Rational> v) { return min(v[0], v[1]); });
  return CellSet(joined(a.partition_, b.partition_, t), t);
}

bool operator==(const CellSet& a, const CellSet& b) {
  require_compatible(a.partition_, b.partition_);
  return fold(a.partition_.layout(), {a.tree_, b.tree_}, [](std::span<const Rational> v) {
           return v[0] == v[1] ? Rational() : Rational(1);
         }).is_zero();
}

// ---- free operations ----

Rational integrate(const StepFunction& f, const Measure& m) {
  if (!(f.partition() == m.partition())) {
    throw PartitionMismatch("integrate: function and measure live on different partitions");
  }
  return fold(f.partition().layout(), {f.tree(), m.tree()},
              [](std::span<const Rational> v) { return v[0] * v[1]; });
}

Rational integrate(const StepFunction& f, const SignedMeasure& m) {
  if (!(f.partition() == m.partition())) {
    throw PartitionMismatch("integrate: function and measure live on different partitions");
  }
  return fold(f.partition().layout(), {f.tree(), m.tree()},
              [](std::span<const Rational> v) { return v[0] * v[1]; });
}

bool compare(const Rational& value, Compare op, const Rational& threshold) {
  switch (op) {
    case Compare::LessEqual: return value <= threshold;
    case Compare::Less: return value < threshold;
    case Compare::GreaterEqual: return value >= threshold;
    case Compare::Greater: return value > threshold;
  }
  return false;
}

CellSet sublevel_cells(const StepFunction& f, Compare op, const Rational& threshold) {
  auto t = map_leaves(f.tree(), [&](const Rational& x) {
    return compare(x, op, threshold) ? Rational(1) : Rational();
  });
  return CellSet::from_indicator(StepFunction::from_tree(f.partition(), std::move(t)));
}

}  // namespace fatou
