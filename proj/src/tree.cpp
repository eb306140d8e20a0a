#include "fatou/detail/tree.hpp"

#include <stdexcept>
#include <string>
#include <unordered_map>

namespace fatou::detail {

namespace {

using Key = std::vector<const Node*>;

struct KeyHash {
  std::size_t operator()(const Key& key) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const Node* p : key) {
      h ^= std::hash<const Node*>{}(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Parallel leaf evaluation only pays off on wide flat splits (atom sets).
constexpr std::size_t kParallelArity = 256;

std::size_t split_arity(std::span<const NodePtr> nodes) {
  std::size_t arity = 0;
  for (const auto& n : nodes) {
    if (n->leaf()) continue;
    if (arity == 0) {
      arity = n->kids.size();
    } else if (arity != n->kids.size()) {
      throw std::invalid_argument("incompatible cell trees: split arity " +
                                  std::to_string(arity) + " vs " +
                                  std::to_string(n->kids.size()));
    }
  }
  return arity;
}

std::vector<NodePtr> children_at(std::span<const NodePtr> nodes, std::size_t i) {
  std::vector<NodePtr> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n->leaf() ? n : n->kids[i]);
  return out;
}

std::vector<Rational> leaf_values(std::span<const NodePtr> nodes) {
  std::vector<Rational> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n->value);
  return out;
}

Key key_of(std::span<const NodePtr> nodes) {
  Key k;
  k.reserve(nodes.size());
  for (const auto& n : nodes) k.push_back(n.get());
  return k;
}

Rational child_weight(Layout layout) {
  return layout == Layout::Dyadic ? Rational(1, 2) : Rational(1);
}

class Mapper {
 public:
  explicit Mapper(const LeafFn& fn) : fn_(fn) {}

  NodePtr run(std::span<const NodePtr> nodes) {
    Key key = key_of(nodes);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const std::size_t arity = split_arity(nodes);
    NodePtr out;
    if (arity == 0) {
      const auto values = leaf_values(nodes);
      out = make_leaf(fn_(values));
    } else {
      std::vector<NodePtr> kids;
      kids.reserve(arity);
      for (std::size_t i = 0; i < arity; ++i) kids.push_back(run(children_at(nodes, i)));
      out = make_split(std::move(kids));
    }
    memo_.emplace(std::move(key), out);
    return out;
  }

 private:
  const LeafFn& fn_;
  std::unordered_map<Key, NodePtr, KeyHash> memo_;
};

class Folder {
 public:
  Folder(Layout layout, const LeafFn& fn, Execution exec)
      : fn_(fn), weight_(child_weight(layout)), exec_(exec) {}

  Rational run(std::span<const NodePtr> nodes) {
    Key key = key_of(nodes);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const std::size_t arity = split_arity(nodes);
    Rational out;
    if (arity == 0) {
      const auto values = leaf_values(nodes);
      out = fn_(values);
    } else if (arity >= kParallelArity && all_children_leaves(nodes, arity)) {
      std::vector<Rational> parts(arity);
      kernels::for_each_index(
          arity,
          [&](std::size_t i) {
            const auto kids = children_at(nodes, i);
            parts[i] = fn_(leaf_values(kids));
          },
          exec_);
      out = kernels::sum(parts, exec_) * weight_;
    } else {
      for (std::size_t i = 0; i < arity; ++i) out += run(children_at(nodes, i));
      out *= weight_;
    }
    memo_.emplace(std::move(key), out);
    return out;
  }

 private:
  static bool all_children_leaves(std::span<const NodePtr> nodes, std::size_t arity) {
    for (const auto& n : nodes) {
      if (n->leaf()) continue;
      for (std::size_t i = 0; i < arity; ++i) {
        if (!n->kids[i]->leaf()) return false;
      }
    }
    return true;
  }

  const LeafFn& fn_;
  Rational weight_;
  Execution exec_;
  std::unordered_map<Key, Rational, KeyHash> memo_;
};

class Counter {
 public:
  const Integer& count(const Node* n) {
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    Integer c = 0;
    if (n->leaf()) {
      c = 1;
    } else {
      for (const auto& k : n->kids) c += count(k.get());
    }
    return memo_.emplace(n, std::move(c)).first->second;
  }

 private:
  std::unordered_map<const Node*, Integer> memo_;
};

bool refines_rec(const Node* fine, const Node* coarse,
                 std::unordered_map<Key, bool, KeyHash>& memo) {
  if (coarse->leaf()) return true;
  if (fine->leaf()) return false;
  if (fine->kids.size() != coarse->kids.size()) return false;
  Key key{fine, coarse};
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  bool ok = true;
  for (std::size_t i = 0; ok && i < fine->kids.size(); ++i) {
    ok = refines_rec(fine->kids[i].get(), coarse->kids[i].get(), memo);
  }
  memo.emplace(std::move(key), ok);
  return ok;
}

}  // namespace

NodePtr make_leaf(Rational value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

NodePtr make_split(std::vector<NodePtr> kids) {
  if (kids.empty()) throw std::invalid_argument("split without children");
  auto n = std::make_shared<Node>();
  n->kids = std::move(kids);
  return n;
}

NodePtr make_split(NodePtr lo, NodePtr hi) {
  return make_split(std::vector<NodePtr>{std::move(lo), std::move(hi)});
}

NodePtr zip_map(std::span<const NodePtr> roots, const LeafFn& fn) {
  Mapper m(fn);
  return m.run(roots);
}

Rational zip_fold(std::span<const NodePtr> roots, Layout layout, const LeafFn& fn,
                  Execution exec) {
  Folder f(layout, fn, exec);
  return f.run(roots);
}

bool refines(const NodePtr& fine, const NodePtr& coarse) {
  std::unordered_map<Key, bool, KeyHash> memo;
  return refines_rec(fine.get(), coarse.get(), memo);
}

bool same_shape(const NodePtr& a, const NodePtr& b) { return refines(a, b) && refines(b, a); }

Integer leaf_count(const NodePtr& root) {
  Counter c;
  return c.count(root.get());
}

unsigned depth(const NodePtr& root) {
  std::unordered_map<const Node*, unsigned> memo;
  std::function<unsigned(const Node*)> rec = [&](const Node* n) -> unsigned {
    if (n->leaf()) return 0;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    unsigned d = 0;
    for (const auto& k : n->kids) d = std::max(d, rec(k.get()) + 1);
    memo.emplace(n, d);
    return d;
  };
  return rec(root.get());
}

NodePtr shape_of(const NodePtr& root) {
  const NodePtr roots[] = {root};
  return zip_map(roots, [](std::span<const Rational>) { return Rational(); });
}

std::vector<FlatCell> flatten(std::span<const NodePtr> roots, Layout layout, std::size_t cap) {
  std::vector<FlatCell> out;
  std::function<void(std::vector<NodePtr>, std::uint64_t, unsigned, const Rational&)> rec =
      [&](std::vector<NodePtr> nodes, std::uint64_t index, unsigned level,
          const Rational& weight) {
        const std::size_t arity = split_arity(nodes);
        if (arity == 0) {
          if (out.size() >= cap) {
            throw std::length_error("partition has more than " + std::to_string(cap) +
                                    " cells; explicit enumeration refused");
          }
          out.push_back(FlatCell{index, level, weight, leaf_values(nodes)});
          return;
        }
        const Rational w = weight * child_weight(layout);
        for (std::size_t i = 0; i < arity; ++i) {
          const std::uint64_t child_index =
              layout == Layout::Dyadic ? index * 2 + i : static_cast<std::uint64_t>(i);
          rec(children_at(nodes, i), child_index, level + 1, w);
        }
      };
  rec(std::vector<NodePtr>(roots.begin(), roots.end()), 0, 0, Rational(1));
  return out;
}

LeafRef leaf_at(const NodePtr& root, const Integer& rank) {
  Counter counter;
  if (rank < 0 || rank >= counter.count(root.get())) {
    throw std::out_of_range("cell rank " + rank.get_str() + " out of range");
  }
  Integer remaining = rank;
  const Node* n = root.get();
  LeafRef ref;
  while (!n->leaf()) {
    for (std::size_t i = 0; i < n->kids.size(); ++i) {
      const Integer& c = counter.count(n->kids[i].get());
      if (remaining < c) {
        ref.index = n->kids.size() == 2 ? ref.index * 2 + i : static_cast<std::uint64_t>(i);
        ref.level += 1;
        n = n->kids[i].get();
        break;
      }
      remaining -= c;
    }
  }
  ref.value = n->value;
  return ref;
}

Integer rank_of(const NodePtr& root, std::uint64_t index, unsigned level) {
  Counter counter;
  Integer rank = 0;
  const Node* n = root.get();
  unsigned consumed = 0;
  while (!n->leaf()) {
    if (consumed == level) {
      throw std::out_of_range("interval spans several cells");
    }
    if (n->kids.size() != 2) throw std::invalid_argument("rank_of expects a dyadic tree");
    const unsigned bit_pos = level - consumed - 1;
    const auto bit = static_cast<std::size_t>((index >> bit_pos) & 1U);
    if (bit == 1) rank += counter.count(n->kids[0].get());
    n = n->kids[bit].get();
    ++consumed;
  }
  return rank;
}

std::optional<Integer> first_nonzero_leaf(const NodePtr& root) {
  Counter counter;
  std::unordered_map<const Node*, bool> any_memo;
  std::function<bool(const Node*)> any = [&](const Node* n) -> bool {
    if (n->leaf()) return !n->value.is_zero();
    if (auto it = any_memo.find(n); it != any_memo.end()) return it->second;
    bool found = false;
    for (const auto& k : n->kids) {
      if (any(k.get())) {
        found = true;
        break;
      }
    }
    any_memo.emplace(n, found);
    return found;
  };
  if (!any(root.get())) return std::nullopt;
  Integer rank = 0;
  const Node* n = root.get();
  while (!n->leaf()) {
    for (const auto& k : n->kids) {
      if (any(k.get())) {
        n = k.get();
        break;
      }
      rank += counter.count(k.get());
    }
  }
  return rank;
}

NodePtr uniform(unsigned level, const Rational& value) {
  NodePtr n = make_leaf(value);
  for (unsigned l = 0; l < level; ++l) n = make_split(n, n);
  return n;
}

NodePtr alternating(unsigned level, const Rational& even, const Rational& odd) {
  if (level == 0) throw std::invalid_argument("alternating pattern needs level >= 1");
  NodePtr n = make_split(make_leaf(even), make_leaf(odd));
  for (unsigned l = 1; l < level; ++l) n = make_split(n, n);
  return n;
}

}  // namespace fatou::detail
