#include "fatou/gallery.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fatou/engine.hpp"

namespace fatou {

namespace {

using detail::NodePtr;

const CellPartition& unit_interval() {
  static const CellPartition p = CellPartition::dyadic_uniform(0);
  return p;
}

StepFunction dyadic_function(NodePtr tree) { return StepFunction::from_tree(unit_interval(), std::move(tree)); }

unsigned checked_level(std::int64_t n) {
  if (n < 1 || n > static_cast<std::int64_t>(kMaxDyadicLevel)) {
    throw std::invalid_argument("n must lie in 1.." + std::to_string(kMaxDyadicLevel) + ", got " +
                                std::to_string(n));
  }
  return static_cast<unsigned>(n);
}

// Uniform level-`level` tree with payload `rest`, except `hit` on cell j.
NodePtr single_cell_tree(unsigned level, std::uint64_t j, const Rational& hit, const Rational& rest) {
  std::vector<NodePtr> uniform_below(level + 1);
  uniform_below[0] = detail::make_leaf(rest);
  for (unsigned l = 1; l <= level; ++l) uniform_below[l] = detail::make_split(uniform_below[l - 1], uniform_below[l - 1]);
  NodePtr node = detail::make_leaf(hit);
  for (unsigned depth = 0; depth < level; ++depth) {
    const bool upper = ((j >> depth) & 1U) != 0;
    const NodePtr& other = uniform_below[depth];
    node = upper ? detail::make_split(other, node) : detail::make_split(node, other);
  }
  return node;
}

Term lebesgue_limit(const Rational& value) {
  return Term{Measure::base(unit_interval()), StepFunction::constant(unit_interval(), value)};
}

Measure oscillating_measure(unsigned level) {
  const Rational n(static_cast<long>(level));
  const Rational even = Rational(1) / n;
  const Rational odd = Rational(2) - even;
  return Measure::from_density(dyadic_function(detail::alternating(level, even, odd)));
}

ClosedForm step_up(const Rational& before, const Rational& after, const Rational& at) {
  if (at <= 1) return ClosedForm::constant(after);
  return ClosedForm::piecewise({{Rational(1), false, ClosedForm::Shape::Affine, before, Rational()},
                                {at, false, ClosedForm::Shape::Affine, after, Rational()}});
}

ClosedForm zero_tail_inf() {
  return ClosedForm::piecewise({{Rational(), true, ClosedForm::Shape::Affine, Rational(), Rational()}});
}

GalleryEntry make_typewriter() {
  GalleryEntry e{"3.1", "moving dyadic dips on Lebesgue measure", 1 << 20, typewriter_dips,
                 lebesgue_limit(Rational(1)), Rational(1, 2), Rational(1), {}, {}, {}, zero_tail_inf()};
  e.base_forms.gap_inf = ClosedForm::dyadic(Rational(-1));
  e.base_forms.gap_sup = ClosedForm::dyadic(Rational(1));
  e.base_forms.tv = ClosedForm::constant(Rational());
  e.base_forms.l1 = ClosedForm::dyadic(Rational(1));
  e.exceedance_form = [](const Rational& eps) {
    return eps <= 1 ? ClosedForm::dyadic(Rational(1)) : ClosedForm::constant(Rational());
  };
  e.lower_tail_form = [](const Rational&) { return ClosedForm::constant(Rational()); };
  return e;
}

GalleryEntry make_unbounded() {
  GalleryEntry e{"3.2", "negative inverse densities on oscillating measures", 64, inverse_density_unbounded,
                 lebesgue_limit(Rational(-1)), Rational(1), Rational(2), {}, {}, {},
                 ClosedForm::piecewise({{Rational(), true, ClosedForm::Shape::Affine, Rational(-1), Rational()},
                                        {Rational(1), true, ClosedForm::Shape::Affine, Rational(-1, 2), Rational()}})};
  e.base_forms.gap_inf = ClosedForm::constant(Rational());
  e.base_forms.gap_sup = ClosedForm::constant(Rational());
  e.base_forms.tv = ClosedForm::affine(Rational(1), Rational(-1));
  // Only the even cells (value -n) can drop below -1 - eps, from n = ceil(1 + eps) on.
  e.exceedance_form = [](const Rational& eps) {
    return step_up(Rational(), Rational(1, 2), Rational((Rational(1) + eps).ceil()));
  };
  // Even cells (value -n, mass 1/2) enter once n >= K; odd cells (value
  // -n/(2n-1), mass 1/2) qualify while n/(2n-1) >= K.
  e.lower_tail_form = [](const Rational& K) {
    if (K <= Rational(1, 2)) return ClosedForm::constant(Rational(-1));
    if (K <= 1) {
      const Integer last_odd = (K / (Rational(2) * K - Rational(1))).floor();
      return step_up(Rational(-1), Rational(-1, 2), Rational(last_odd + 1));
    }
    return step_up(Rational(), Rational(-1, 2), Rational(K.ceil()));
  };
  return e;
}

GalleryEntry make_bounded() {
  GalleryEntry e{"3.3", "inverse densities bounded away from zero", 64, inverse_density_bounded,
                 lebesgue_limit(Rational(1)), Rational(1, 3), Rational(1), {}, {}, {}, zero_tail_inf()};
  e.base_forms.gap_inf = ClosedForm::constant(Rational());
  e.base_forms.gap_sup = ClosedForm::constant(Rational());
  e.base_forms.tv = ClosedForm::constant(Rational(1, 2));
  e.base_forms.l1 = ClosedForm::constant(Rational(2, 3));
  e.exceedance_form = [](const Rational& eps) {
    return ClosedForm::constant(eps <= Rational(1, 3) ? Rational(1, 2) : Rational());
  };
  e.lower_tail_form = [](const Rational&) { return ClosedForm::constant(Rational()); };
  return e;
}

GalleryEntry make_constant() {
  GalleryEntry e{"3.4", "constant function on oscillating measures", 64, constant_on_oscillating_measure,
                 lebesgue_limit(Rational(1)), Rational(1, 2), Rational(1), {}, {}, {}, zero_tail_inf()};
  e.base_forms.gap_inf = ClosedForm::affine(Rational(-1, 2), Rational(1, 2));
  e.base_forms.gap_sup = ClosedForm::affine(Rational(1, 2), Rational(-1, 2));
  e.base_forms.tv = ClosedForm::affine(Rational(1), Rational(-1));
  e.base_forms.l1 = ClosedForm::constant(Rational());
  e.exceedance_form = [](const Rational&) { return ClosedForm::constant(Rational()); };
  e.lower_tail_form = [](const Rational&) { return ClosedForm::constant(Rational()); };
  return e;
}

std::vector<Rational> merged(const std::vector<Rational>& grid, const Rational& extra) {
  std::vector<Rational> out = grid;
  if (std::find(out.begin(), out.end(), extra) == out.end()) out.push_back(extra);
  return out;
}

void cross_check(const GalleryEntry& e) {
  constexpr std::int64_t kCheckedPrefix = 16;
  const auto eps = merged(default_eps_grid(), e.eps);
  const auto K = merged(default_K_grid(), e.K);
  const auto report = equivalence_report(e.sequence(eps, K), eps, K, kCheckedPrefix);
  if (!report.analytic_mismatches.empty()) {
    throw std::logic_error("gallery entry " + e.id + " disagrees with its closed forms: " +
                           report.analytic_mismatches.front());
  }
}

}  // namespace

Term typewriter_dips(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1, got " + std::to_string(n));
  const auto u = static_cast<std::uint64_t>(n);
  const unsigned k = static_cast<unsigned>(std::bit_width(u)) - 1;
  const std::uint64_t j = u - (std::uint64_t{1} << k);
  StepFunction f = dyadic_function(single_cell_tree(k, j, Rational(), Rational(1)));
  return Term{Measure::base(f.partition()), std::move(f)};
}

Term inverse_density_unbounded(std::int64_t n) {
  const unsigned level = checked_level(n);
  const Rational nn(static_cast<long>(n));
  StepFunction f = dyadic_function(detail::alternating(level, -nn, -nn / (Rational(2) * nn - Rational(1))));
  return Term{oscillating_measure(level), std::move(f)};
}

Term inverse_density_bounded(std::int64_t n) {
  const unsigned level = checked_level(n);
  Measure m = Measure::from_density(dyadic_function(detail::alternating(level, Rational(1, 2), Rational(3, 2))));
  StepFunction f = dyadic_function(detail::alternating(level, Rational(2), Rational(2, 3)));
  return Term{std::move(m), std::move(f)};
}

Term constant_on_oscillating_measure(std::int64_t n) {
  const unsigned level = checked_level(n);
  Measure m = oscillating_measure(level);
  StepFunction f = StepFunction::constant(m.partition(), Rational(1));
  return Term{std::move(m), std::move(f)};
}

CellSet even_cells(unsigned level) {
  return CellSet::from_indicator(dyadic_function(detail::alternating(level, Rational(1), Rational())));
}

AnalyticTraces GalleryEntry::analytic(const std::vector<Rational>& eps_grid,
                                      const std::vector<Rational>& K_grid) const {
  AnalyticTraces a = base_forms;
  for (const auto& eps : eps_grid) a.exceedance.insert_or_assign(eps, exceedance_form(eps));
  for (const auto& k : K_grid) a.lower_tail.insert_or_assign(k, lower_tail_form(k));
  a.lower_tail_inf = lower_tail_inf;
  return a;
}

SequencePair GalleryEntry::sequence(const std::vector<Rational>& eps_grid,
                                    const std::vector<Rational>& K_grid) const {
  return SequencePair::generated(generator, limit).with_analytic(analytic(eps_grid, K_grid));
}

std::vector<std::string> gallery_ids() { return {"3.1", "3.2", "3.3", "3.4"}; }

const GalleryEntry& gallery_entry(std::string_view id) {
  static std::once_flag built;
  static std::map<std::string, GalleryEntry, std::less<>> entries;
  std::call_once(built, [] {
    for (auto e : {make_typewriter(), make_unbounded(), make_bounded(), make_constant()}) {
      cross_check(e);
      entries.emplace(e.id, std::move(e));
    }
  });
  auto it = entries.find(id);
  if (it == entries.end()) throw std::out_of_range("unknown gallery example \"" + std::string(id) + "\"");
  return it->second;
}

}  // namespace fatou
