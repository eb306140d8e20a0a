#include <doctest.h>

#include <random>

#include "fatou/engine.hpp"
#include "fatou/gallery.hpp"
#include "fatou/random.hpp"
#include "oracle.hpp"

using namespace fatou;

namespace {

const CellPartition& unit() {
  static const auto p = CellPartition::dyadic_uniform(0);
  return p;
}

Term lebesgue_pair(const Rational& c) { return {Measure::base(unit()), StepFunction::constant(unit(), c)}; }

SequencePair constant_sequence(const Term& t) {
  return SequencePair::generated([t](std::int64_t) { return t; }, t);
}

std::vector<Rational> rs(std::initializer_list<Rational> xs) { return xs; }

}  // namespace

TEST_CASE("gap functionals on simple inputs") {
  const auto lim = lebesgue_pair(1);
  const auto g = gap_inf(lim.function, lim.measure, lim.function, lim.measure);
  CHECK(g.value == Rational(0));
  CHECK(g.witness.count() == 0);
  CHECK(gap_sup(lim.function, lim.measure, lim.function, lim.measure) == Rational(0));

  const auto t4 = typewriter_dips(4);
  CHECK(gap_inf(lim.function, lim.measure, t4.function, t4.measure).value == Rational(-1, 4));

  const auto s2 = constant_on_oscillating_measure(2);
  const auto g2 = gap_inf(lim.function, lim.measure, s2.function, s2.measure);
  CHECK(g2.value == Rational(-1, 4));
  CHECK(g2.witness == even_cells(2));
  CHECK(gap_sup(lim.function, lim.measure, s2.function, s2.measure) == Rational(1, 4));
  CHECK(brute_force_gap(lim.function, lim.measure, s2.function, s2.measure, GapMode::Inf) == Rational(-1, 4));
  CHECK(brute_force_gap(lim.function, lim.measure, s2.function, s2.measure, GapMode::Sup) == Rational(1, 4));

  for (std::int64_t n = 1; n <= 12; ++n) {
    const auto t = inverse_density_unbounded(n);
    const auto l = lebesgue_pair(-1);
    CHECK(gap_sup(l.function, l.measure, t.function, t.measure) == Rational(0));
  }
  const auto a = StepFunction::constant(CellPartition::atoms({"p"}), 1);
  CHECK_THROWS_AS(gap_inf(lim.function, lim.measure, a, Measure::base(a.partition())), PartitionMismatch);
}

TEST_CASE("brute force cell cap") {
  const auto p = CellPartition::dyadic_uniform(5);
  const auto f = StepFunction::constant(p, 1);
  const auto m = Measure::base(p);
  CHECK_THROWS_AS(brute_force_gap(f, m, f, m, GapMode::Inf), std::length_error);
  CHECK_THROWS_AS(brute_force_tv(m, m), std::length_error);
}

TEST_CASE("closed forms match subset enumeration on random instances") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = fatou::random::instance(rng, 12);
    const auto d = oracle::deltas(oracle::flatten(in.f, in.m, in.g, in.v));
    const auto inf = gap_inf(in.f, in.m, in.g, in.v);
    const auto sup = gap_sup(in.f, in.m, in.g, in.v);
    CHECK(inf.value == oracle::subset_inf(d));
    CHECK(sup == oracle::subset_sup_abs(d));
    CHECK(-sup <= inf.value);
    CHECK(inf.value <= Rational(0));
    const Rational witness_sum = integrate(in.g.lift(inf.witness.partition()) * inf.witness.indicator(),
                                           in.v.lift(inf.witness.partition())) -
                                 integrate(in.f.lift(inf.witness.partition()) * inf.witness.indicator(),
                                           in.m.lift(inf.witness.partition()));
    CHECK(witness_sum == inf.value);
    for (const auto exec : {Execution::Serial, Execution::Parallel}) {
      CHECK(brute_force_gap(in.f, in.m, in.g, in.v, GapMode::Inf, exec) == inf.value);
      CHECK(brute_force_gap(in.f, in.m, in.g, in.v, GapMode::Sup, exec) == sup);
      CHECK(brute_force_tv(in.m, in.v, exec) == tv_distance(in.m, in.v));
    }
  }
}

TEST_CASE("same-measure identities") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = fatou::random::partition(rng, 12);
    const auto m = fatou::random::measure(rng, p);
    const auto f = fatou::random::step_function(rng, p);
    const auto g = fatou::random::step_function(rng, p);
    const Rational neg = integrate(neg_part(g - f), m);
    const Rational pos = integrate(pos_part(g - f), m);
    CHECK(gap_inf(f, m, g, m).value == -neg);
    const Rational sup = gap_sup(f, m, g, m);
    CHECK(sup == max(neg, pos));
    const Rational l1 = l1_distance(f, g, m);
    CHECK(l1 == neg + pos);
    CHECK(sup <= l1);
    CHECK(l1 <= Rational(2) * sup);
  }
}

TEST_CASE("condition checks on constant and bounded sequences") {
  const auto seq = constant_sequence(lebesgue_pair(3));
  const auto ci = check_condition_i(seq, default_eps_grid(), 8);
  CHECK(ci.verdict == Verdict::HoldsOnPrefix);
  for (const auto& pv : ci.per_parameter)
    for (const auto& pt : pv.trace) CHECK(pt.value == Rational(0));
  const auto cii = check_condition_ii(seq, default_K_grid(), 8);
  CHECK(cii.verdict == Verdict::HoldsOnPrefix);
  CHECK_FALSE(cii.witness.has_value());

  const auto bounded = constant_sequence(lebesgue_pair(-3));
  const auto tail = check_condition_ii(bounded, rs({1, 2, 4}), 8);
  CHECK(tail.verdict == Verdict::HoldsOnPrefix);
  CHECK(tail.per_parameter[0].prefix_infimum->value == Rational(-3));
  CHECK(tail.per_parameter[2].prefix_infimum->value == Rational(0));

  CHECK_THROWS_AS(check_condition_i(seq, rs({0}), 4), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_ii(seq, rs({-1}), 4), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_i(seq, {}, 4), std::invalid_argument);
}

TEST_CASE("condition checks on the gallery") {
  const auto& e31 = gallery_entry("3.1");
  const auto c31 = check_condition_i(e31.sequence({Rational(1, 2)}, {}), {Rational(1, 2)}, 64);
  CHECK(c31.verdict == Verdict::HoldsOnPrefix);

  const auto& e33 = gallery_entry("3.3");
  const auto c33 = check_condition_i(e33.sequence({Rational(1, 3)}, {}), {Rational(1, 3)}, 16);
  CHECK(c33.verdict == Verdict::Fails);
  REQUIRE(c33.witness.has_value());
  CHECK(c33.witness->value == Rational(1, 2));

  const auto& e32 = gallery_entry("3.2");
  const auto c32 = check_condition_ii(e32.sequence({}, {Rational(2)}), {Rational(2)}, 16);
  CHECK(c32.verdict == Verdict::Fails);
  REQUIRE(c32.witness.has_value());
  CHECK(c32.witness->parameter == "K");
  CHECK(c32.witness->value == Rational(-1, 2));

  // Without certificates the same traces stay undecided.
  const auto bare = SequencePair::generated(e32.generator, e32.limit);
  CHECK(check_condition_i(bare, {Rational(1)}, 16).verdict == Verdict::Inconclusive);
  CHECK(check_condition_ii(bare, {Rational(2)}, 16).verdict == Verdict::Inconclusive);
}

TEST_CASE("subsequence extraction") {
  const auto seq = constant_sequence(lebesgue_pair(1));
  const auto trivial = extract_subsequence(seq, Rational(1, 2), 4, 10);
  CHECK(trivial.ok);
  CHECK(trivial.indices() == std::vector<std::int64_t>{1, 2, 3, 4});

  const auto& e31 = gallery_entry("3.1");
  const auto r = extract_subsequence(e31.sequence({}, {}), Rational(1, 2), 6, 256);
  REQUIRE(r.ok);
  REQUIRE(r.steps.size() == 6);
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    CHECK(r.steps[k].exceedance <= Rational::pow2(-static_cast<long>(k + 1)));
    if (k > 0) CHECK(r.steps[k - 1].n < r.steps[k].n);
    const auto t = e31.generator(r.steps[k].n);
    CHECK(exceedance_measure(e31.limit.function, t.function, e31.limit.measure, Rational(1, 2)) ==
          r.steps[k].exceedance);
  }

  const auto& e32 = gallery_entry("3.2");
  const auto fail = extract_subsequence(e32.sequence({}, {}), Rational(1), 3, 64);
  CHECK_FALSE(fail.ok);
  REQUIRE(fail.best_attempt.has_value());
  CHECK(fail.best_attempt->exceedance == Rational(1, 2));
  CHECK_THROWS_AS(extract_subsequence(seq, Rational(0), 2, 4), std::invalid_argument);
}

TEST_CASE("pointwise prefix minimum") {
  const auto lim = lebesgue_pair(2);
  CHECK(pointwise_liminf_prefix(constant_sequence(lim), 5) == lim.function);
  CHECK_THROWS_AS(pointwise_liminf_prefix(constant_sequence(lim), 3, 4), std::invalid_argument);

  const auto& e31 = gallery_entry("3.1");
  const auto seq = e31.sequence({}, {});
  for (std::int64_t level = 1; level <= 4; ++level) {
    const std::int64_t last = (std::int64_t{2} << level) - 1;
    const auto low = pointwise_liminf_prefix(seq, last, std::int64_t{1} << level);
    CHECK(low.max_value() == Rational(0));
  }
  const auto sub = seq.subsequence({1, 2, 4, 8, 16, 32});
  const auto along = pointwise_liminf_prefix(sub, 6, 3);
  const auto vals = along.lift(CellPartition::dyadic_uniform(5)).values();
  for (std::size_t c = 0; c < vals.size(); ++c) CHECK(vals[c] == (c < 8 ? Rational(0) : Rational(1)));

  // Nonnegative sequences: the integral of the prefix minimum is below every term's integral.
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::int64_t, Term> terms;
    const auto p = CellPartition::dyadic_uniform(3);
    for (std::int64_t n = 1; n <= 6; ++n) terms.emplace(n, Term{Measure::base(p), abs(fatou::random::step_function(rng, p))});
    const auto listed = SequencePair::listed(terms, Term{Measure::base(p), StepFunction::constant(p, 0)});
    const auto low = pointwise_liminf_prefix(listed, 6, 2);
    for (std::int64_t n = 2; n <= 6; ++n)
      CHECK(integrate(low, Measure::base(p)) <= integrate(terms.at(n).function, Measure::base(p)));
  }
}

TEST_CASE("Radon-Nikodym derivatives") {
  const auto atoms = CellPartition::atoms({"a", "b", "c"});
  const auto m = Measure::from_masses(atoms, rs({Rational(1, 2), 0, 2}));
  const auto self = radon_nikodym(m, m);
  CHECK(self.values() == rs({1, 0, 1}));

  for (std::int64_t n = 1; n <= 8; ++n) {
    const auto mun = inverse_density_unbounded(n).measure;
    const auto g = radon_nikodym(mun, Measure::base(unit()));
    const auto vals = g.values();
    REQUIRE(vals.size() == (std::size_t{1} << n));
    for (std::size_t c = 0; c < vals.size(); ++c) CHECK(vals[c] == oracle::oscillating_density(n, c));
  }

  const auto t = SignedMeasure::from_masses(atoms, rs({1, 3, 0}));
  try {
    radon_nikodym(t, m);
    FAIL("expected NotAbsolutelyContinuous");
  } catch (const NotAbsolutelyContinuous& e) {
    CHECK(e.cell() == "b");
  }

  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = fatou::random::partition(rng, 10);
    const auto ref = fatou::random::measure(rng, p);
    const auto rho = fatou::random::step_function(rng, p);
    const auto tt = SignedMeasure::with_density(ref, rho);
    const auto dens = radon_nikodym(tt, ref);
    const auto flat_t = tt.masses();
    const auto flat_m = ref.masses();
    const auto flat_d = dens.values();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << flat_t.size()); ++mask) {
      Rational lhs, rhs;
      for (std::size_t c = 0; c < flat_t.size(); ++c) {
        if (((mask >> c) & 1U) == 0) continue;
        lhs += flat_d[c] * flat_m[c];
        rhs += flat_t[c];
      }
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("total-variation tail of a signed measure") {
  const auto leb = Measure::base(unit());
  CHECK(tv_measure_tail(leb.as_signed(), leb, 2) == Rational(0));
  for (std::int64_t n = 1; n <= 8; ++n)
    CHECK(tv_measure_tail(inverse_density_unbounded(n).measure.as_signed(), leb, 3) == Rational(0));
  const auto atoms = CellPartition::atoms({"a", "b"});
  const auto m = Measure::from_masses(atoms, rs({1, Rational(1, 3)}));
  const auto t = SignedMeasure::with_density(m, StepFunction::constant(atoms, -5));
  CHECK(tv_measure_tail(t, m, 2) == Rational(5) * m.total_mass());
}

TEST_CASE("equivalence report on an eventually constant sequence") {
  const auto lim = lebesgue_pair(1);
  const auto seq = SequencePair::generated(
      [lim](std::int64_t n) { return n < 4 ? typewriter_dips(n) : lim; }, lim);
  AnalyticTraces a;
  a.gap_inf = ClosedForm::piecewise({{Rational(1), false, ClosedForm::Shape::DyadicFloor, Rational(-1), Rational()},
                                     {Rational(4), false, ClosedForm::Shape::Affine, Rational(), Rational()}});
  a.tv = ClosedForm::constant(0);
  for (const auto& eps : default_eps_grid()) {
    a.exceedance.emplace(eps, ClosedForm::piecewise({{Rational(1), false, ClosedForm::Shape::DyadicFloor, Rational(1), Rational()},
                                                     {Rational(4), false, ClosedForm::Shape::Affine, Rational(), Rational()}}));
  }
  a.lower_tail_inf = ClosedForm::piecewise({{Rational(), true, ClosedForm::Shape::Affine, Rational(), Rational()}});
  const auto report = equivalence_report(seq.with_analytic(a), default_eps_grid(), default_K_grid(), 12);
  CHECK(report.analytic_mismatches.empty());
  for (const auto& row : report.rows)
    if (row.n >= 4) CHECK(row.gap_inf == Rational(0));
  CHECK(report.cond_i.verdict == Verdict::HoldsOnPrefix);
  CHECK(report.cond_ii.verdict == Verdict::HoldsOnPrefix);
  CHECK(report.gap_status == LimitStatus::Vanishing);
  CHECK(report.tv_status == LimitStatus::Vanishing);
  CHECK(report.consistency == Consistency::Consistent);
  REQUIRE(report.consistency_flag.has_value());
  CHECK(*report.consistency_flag);
  CHECK(report.fixed_measure);
  CHECK(report.nonnegative);
}

TEST_CASE("equivalence report flags wrong closed forms") {
  const auto& e34 = gallery_entry("3.4");
  auto a = e34.analytic({}, {});
  a.gap_inf = ClosedForm::affine(Rational(-1, 2), Rational(1, 3));
  const auto seq = SequencePair::generated(e34.generator, e34.limit).with_analytic(a);
  const auto report = equivalence_report(seq, {Rational(1, 2)}, {Rational(1)}, 6);
  CHECK_FALSE(report.analytic_mismatches.empty());
}

TEST_CASE("equivalence report on the gallery") {
  struct Expect {
    const char* id;
    Verdict ci, cii;
    LimitStatus gap, tv;
    Consistency consistency;
  };
  const Expect table[] = {
      {"3.1", Verdict::HoldsOnPrefix, Verdict::HoldsOnPrefix, LimitStatus::Vanishing, LimitStatus::Vanishing, Consistency::Consistent},
      {"3.2", Verdict::Fails, Verdict::Fails, LimitStatus::Vanishing, LimitStatus::BoundedAway, Consistency::HypothesisNotMet},
      {"3.3", Verdict::Fails, Verdict::HoldsOnPrefix, LimitStatus::Vanishing, LimitStatus::BoundedAway, Consistency::HypothesisNotMet},
      {"3.4", Verdict::HoldsOnPrefix, Verdict::HoldsOnPrefix, LimitStatus::BoundedAway, LimitStatus::BoundedAway, Consistency::HypothesisNotMet},
  };
  for (const auto& x : table) {
    CAPTURE(x.id);
    const auto& e = gallery_entry(x.id);
    std::vector<Rational> eps = default_eps_grid();
    eps.push_back(Rational(1, 3));
    const auto report = equivalence_report(e.sequence(eps, default_K_grid()), eps, default_K_grid(), 24);
    CHECK(report.analytic_mismatches.empty());
    CHECK(report.cond_i.verdict == x.ci);
    CHECK(report.cond_ii.verdict == x.cii);
    CHECK(report.gap_status == x.gap);
    CHECK(report.tv_status == x.tv);
    CHECK(report.consistency == x.consistency);
    CHECK(report.consistency_flag.has_value() == (x.consistency == Consistency::Consistent));
    if (report.cond_i.verdict == Verdict::Fails) CHECK(report.cond_i.witness.has_value());
    if (report.cond_ii.verdict == Verdict::Fails) CHECK(report.cond_ii.witness.has_value());
  }
}
