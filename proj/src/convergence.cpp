#include "fatou/convergence.hpp"

#include <stdexcept>

#include "fatou/kernels.hpp"

namespace fatou {

namespace {

using detail::NodePtr;

Rational fold(const CellPartition& p, std::initializer_list<NodePtr> trees,
              const detail::LeafFn& fn) {
  const std::vector<NodePtr> roots(trees);
  return detail::zip_fold(roots, p.layout(), fn);
}

void require_positive(const Rational& x, const char* name) {
  if (x.sign() <= 0) {
    throw std::invalid_argument(std::string(name) + " must be positive, got " + x.str());
  }
}

}  // namespace

TestSetFamily TestSetFamily::dyadic_intervals(unsigned max_level, bool with_complements) {
  if (max_level > 16) throw std::invalid_argument("test family level is capped at 16");
  TestSetFamily fam;
  for (unsigned level = 0; level <= max_level; ++level) {
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << level); ++j) {
      const DyadicInterval iv(j, level);
      CellSet s = CellSet::dyadic_interval(iv);
      if (with_complements && level > 0) fam.add("complement of " + iv.str(), s.complement());
      fam.add(iv.str(), std::move(s));
    }
  }
  return fam;
}

TestSetFamily TestSetFamily::singletons(const CellPartition& atoms, bool with_complements) {
  if (atoms.kind() != PartitionKind::AtomSet) {
    throw std::invalid_argument("singletons() needs an atom set");
  }
  TestSetFamily fam;
  const auto& labels = atoms.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Integer idx[] = {Integer(static_cast<unsigned long>(i))};
    CellSet s = CellSet::from_indices(atoms, idx);
    if (with_complements) fam.add("not " + labels[i], s.complement());
    fam.add("{" + labels[i] + "}", std::move(s));
  }
  return fam;
}

void TestSetFamily::add(std::string label, CellSet set) {
  members_.push_back(Member{std::move(label), std::move(set)});
}

void TestSetFamily::add_indices(std::string label, const CellPartition& reference,
                                const std::vector<Integer>& cells) {
  add(std::move(label), CellSet::from_indices(reference, cells));
}

Rational tv_distance(const Measure& m, const Measure& v) {
  return tv_distance(m.as_signed(), v.as_signed());
}

Rational tv_distance(const SignedMeasure& m, const SignedMeasure& v) {
  require_compatible(m.partition(), v.partition());
  return fold(m.partition(), {m.tree(), v.tree()},
              [](std::span<const Rational> x) { return (x[0] - x[1]).abs(); });
}

Rational setwise_gap(const Measure& m, const Measure& v, const TestSetFamily& family) {
  require_compatible(m.partition(), v.partition());
  const auto& members = family.members();
  std::vector<Rational> gaps(members.size());
  kernels::for_each_index(
      members.size(),
      [&](std::size_t i) {
        gaps[i] = (m.measure_of(members[i].set) - v.measure_of(members[i].set)).abs();
      },
      Execution::Parallel);
  Rational best;
  for (const auto& g : gaps) best = max(best, g);
  return best;
}

Rational exceedance_measure(const StepFunction& f, const StepFunction& g, const Measure& m,
                            const Rational& eps) {
  require_positive(eps, "eps");
  require_compatible(f.partition(), g.partition());
  require_compatible(f.partition(), m.partition());
  return fold(m.partition(), {f.tree(), g.tree(), m.tree()}, [&](std::span<const Rational> x) {
    return x[1] <= x[0] - eps ? x[2] : Rational();
  });
}

Rational lower_tail(const StepFunction& f, const Measure& m, const Rational& K) {
  require_positive(K, "K");
  require_compatible(f.partition(), m.partition());
  const Rational bound = -K;
  return fold(m.partition(), {f.tree(), m.tree()}, [&](std::span<const Rational> x) {
    return x[0] <= bound ? x[0] * x[1] : Rational();
  });
}

Rational ui_tail(const StepFunction& f, const Measure& m, const Rational& K) {
  require_positive(K, "K");
  require_compatible(f.partition(), m.partition());
  return fold(m.partition(), {f.tree(), m.tree()}, [&](std::span<const Rational> x) {
    const Rational a = x[0].abs();
    return a >= K ? a * x[1] : Rational();
  });
}

Rational l1_distance(const StepFunction& f, const StepFunction& g, const Measure& m) {
  require_compatible(f.partition(), g.partition());
  require_compatible(f.partition(), m.partition());
  return fold(m.partition(), {f.tree(), g.tree(), m.tree()},
              [](std::span<const Rational> x) { return (x[0] - x[1]).abs() * x[2]; });
}

Trace convergence_in_measure_prefix(const SequencePair& seq, const Rational& eps,
                                    std::int64_t prefix) {
  require_positive(eps, "eps");
  if (prefix < 1) throw std::invalid_argument("prefix must be >= 1");
  const auto ns = seq.indices(prefix);
  const Term& lim = seq.limit();
  Trace out(ns.size());
  kernels::for_each_index(
      ns.size(),
      [&](std::size_t i) {
        const Term t = seq.term(ns[i]);
        const Rational value = fold(
            lim.measure.partition(), {t.function.tree(), lim.function.tree(), lim.measure.tree()},
            [&](std::span<const Rational> x) {
              return (x[0] - x[1]).abs() >= eps ? x[2] : Rational();
            });
        out[i] = TracePoint{ns[i], value};
      },
      Execution::Parallel);
  return out;
}

}  // namespace fatou
