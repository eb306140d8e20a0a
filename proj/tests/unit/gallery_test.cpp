#include <doctest.h>

#include <bit>

#include "fatou/engine.hpp"
#include "fatou/gallery.hpp"
#include "oracle.hpp"

using namespace fatou;

namespace {

std::vector<Rational> flat_values(const StepFunction& f, unsigned level) {
  return f.lift(CellPartition::dyadic_uniform(level)).values();
}

}  // namespace

TEST_CASE("typewriter dips") {
  const auto t1 = typewriter_dips(1);
  CHECK(t1.function.partition().cell_count() == 1);
  CHECK(t1.function.values() == std::vector<Rational>{0});

  const auto t4 = typewriter_dips(4).function;
  CHECK(t4.partition() == CellPartition::dyadic_uniform(2));
  CHECK(t4.values() == std::vector<Rational>{0, 1, 1, 1});

  const auto t3 = typewriter_dips(3).function;
  CHECK(t3.values() == std::vector<Rational>{1, 0});

  // Within one level the dips tile [0,1) exactly once.
  for (unsigned k = 0; k <= 5; ++k) {
    std::vector<int> hits(std::size_t{1} << k, 0);
    for (std::int64_t n = std::int64_t{1} << k; n < (std::int64_t{2} << k); ++n) {
      const auto vals = flat_values(typewriter_dips(n).function, k);
      for (std::size_t c = 0; c < vals.size(); ++c)
        if (vals[c].is_zero()) ++hits[c];
    }
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS_AS(typewriter_dips(0), std::invalid_argument);
}

TEST_CASE("oscillating measures") {
  for (std::int64_t n = 1; n <= 10; ++n) {
    const auto t = inverse_density_unbounded(n);
    CHECK(t.measure.total_mass() == Rational(1));
    CHECK(t.measure.masses() == oracle::oscillating_masses(n));
    const auto vals = t.function.values();
    const auto masses = t.measure.masses();
    for (std::size_t c = 0; c < vals.size(); ++c) {
      CHECK(vals[c] * masses[c] == Rational(-1) * Rational::pow2(-n));
      CHECK(vals[c] == Rational(-1) / oracle::oscillating_density(n, c));
    }
    const auto b = inverse_density_bounded(n);
    CHECK(b.measure.total_mass() == Rational(1));
    const auto bv = b.function.values();
    const auto bd = b.measure.density().values();
    for (std::size_t c = 0; c < bv.size(); ++c) CHECK(bv[c] * bd[c] == Rational(1));
    CHECK(lower_tail(b.function, b.measure, 1) == Rational(0));

    const auto s = constant_on_oscillating_measure(n);
    CHECK(s.measure == t.measure);
    CHECK(s.function == StepFunction::constant(s.function.partition(), 1));
  }
  const auto two = inverse_density_unbounded(2);
  CHECK(tv_distance(two.measure, Measure::base(CellPartition::dyadic_uniform(0))) == Rational(1, 2));
  CHECK_THROWS_AS(inverse_density_unbounded(0), std::invalid_argument);
  CHECK_THROWS_AS(inverse_density_unbounded(65), std::invalid_argument);
}

TEST_CASE("even cells") {
  const auto s = even_cells(3);
  CHECK(s.indices() == std::vector<Integer>{0, 2, 4, 6});
  CHECK(s.base_measure() == Rational(1, 2));
}

TEST_CASE("gallery ids and lookups") {
  CHECK(gallery_ids() == std::vector<std::string>{"3.1", "3.2", "3.3", "3.4"});
  CHECK(gallery_entry("3.2").eps == Rational(1));
  CHECK(gallery_entry("3.2").K == Rational(2));
  CHECK(gallery_entry("3.3").eps == Rational(1, 3));
  CHECK_THROWS_AS(gallery_entry("3.5"), std::out_of_range);
}

TEST_CASE("closed forms agree with computed values for n = 1..64") {
  for (const auto& id : gallery_ids()) {
    CAPTURE(id);
    const auto& e = gallery_entry(id);
    std::vector<Rational> eps = default_eps_grid();
    eps.push_back(e.eps);
    eps.push_back(Rational(1, 3));
    std::vector<Rational> K = default_K_grid();
    K.push_back(Rational(1, 2));
    K.push_back(Rational(3, 4));
    const auto report = equivalence_report(e.sequence(eps, K), eps, K, 64);
    CHECK(report.rows.size() == 64);
    for (const auto& m : report.analytic_mismatches) MESSAGE(m);
    CHECK(report.analytic_mismatches.empty());
  }
}

TEST_CASE("published values") {
  const auto lim1 = gallery_entry("3.1").limit;
  CHECK(l1_distance(typewriter_dips(4).function, lim1.function, lim1.measure) == Rational(1, 4));
  for (std::int64_t n = 1; n <= 64; ++n) {
    const int k = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n))) - 1;
    CHECK(l1_distance(typewriter_dips(n).function, lim1.function, lim1.measure) == Rational::pow2(-k));
  }
  const auto lim4 = gallery_entry("3.4").limit;
  for (std::int64_t n = 1; n <= 16; ++n) {
    const auto t = constant_on_oscillating_measure(n);
    const auto g = gap_inf(lim4.function, lim4.measure, t.function, t.measure);
    CHECK(g.value == -(Rational(1, 2) - Rational(1, 2 * n)));
    if (n > 1) CHECK(g.witness == even_cells(static_cast<unsigned>(n)));
  }
}
