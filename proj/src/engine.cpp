#include "fatou/engine.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace fatou {

namespace {

using detail::NodePtr;

void require_aligned4(const StepFunction& f, const Measure& m, const StepFunction& g,
                      const Measure& v) {
  require_compatible(f.partition(), m.partition());
  require_compatible(f.partition(), g.partition());
  require_compatible(f.partition(), v.partition());
}

// Delta density of a cell: g * dv - f * dm, from aligned leaves (f, m, g, v).
Rational delta(std::span<const Rational> x) { return x[2] * x[3] - x[0] * x[1]; }

std::vector<Rational> cell_deltas(const StepFunction& f, const Measure& m, const StepFunction& g,
                                  const Measure& v) {
  require_aligned4(f, m, g, v);
  const NodePtr roots[] = {f.tree(), m.tree(), g.tree(), v.tree()};
  const auto cells = detail::flatten(roots, f.partition().layout(), kernels::kMaxEnumerationCells);
  std::vector<Rational> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(delta(c.values) * c.weight);
  return out;
}

void require_grid(const std::vector<Rational>& grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (const auto& x : grid) {
    if (x.sign() <= 0) {
      throw std::invalid_argument(std::string(name) + " grid values must be positive, got " +
                                  x.str());
    }
  }
}

std::vector<std::int64_t> prefix_indices(const SequencePair& seq, std::int64_t prefix) {
  if (prefix < 1) throw std::invalid_argument("prefix must be >= 1");
  auto ns = seq.indices(prefix);
  if (ns.empty()) {
    throw std::invalid_argument("sequence has no terms with n <= " + std::to_string(prefix));
  }
  return ns;
}

// Evaluates fn on every term with index in ns, in parallel, keeping order.
template <class Fn>
Trace trace_over(const SequencePair& seq, const std::vector<std::int64_t>& ns, Fn&& fn) {
  Trace out(ns.size());
  kernels::for_each_index(
      ns.size(), [&](std::size_t i) { out[i] = TracePoint{ns[i], fn(seq.term(ns[i]))}; },
      Execution::Parallel);
  return out;
}

TracePoint trace_min(const Trace& t) {
  TracePoint best = t.front();
  for (const auto& p : t) {
    if (p.value < best.value) best = p;
  }
  return best;
}

}  // namespace

GapInf gap_inf(const StepFunction& f, const Measure& m, const StepFunction& g, const Measure& v) {
  require_aligned4(f, m, g, v);
  const std::vector<NodePtr> roots{f.tree(), m.tree(), g.tree(), v.tree()};
  const Rational value = detail::zip_fold(roots, f.partition().layout(),
                                          [](std::span<const Rational> x) {
                                            return min(Rational(), delta(x));
                                          });
  const NodePtr ind = detail::zip_map(roots, [](std::span<const Rational> x) {
    return delta(x).sign() < 0 ? Rational(1) : Rational();
  });
  return GapInf{value, CellSet::from_indicator(StepFunction::from_tree(f.partition(), ind))};
}

Rational gap_sup(const StepFunction& f, const Measure& m, const StepFunction& g, const Measure& v) {
  require_aligned4(f, m, g, v);
  const std::vector<NodePtr> roots{f.tree(), m.tree(), g.tree(), v.tree()};
  const auto layout = f.partition().layout();
  const Rational plus = detail::zip_fold(roots, layout, [](std::span<const Rational> x) {
    return delta(x).positive_part();
  });
  const Rational minus = detail::zip_fold(roots, layout, [](std::span<const Rational> x) {
    return delta(x).negative_part();
  });
  return max(plus, minus);
}

Rational brute_force_gap(const StepFunction& f, const Measure& m, const StepFunction& g,
                         const Measure& v, GapMode mode, Execution exec) {
  const auto deltas = cell_deltas(f, m, g, v);
  const auto ext = kernels::subset_sum_extrema(deltas, exec);
  if (mode == GapMode::Inf) return ext.min;
  return max(ext.max, -ext.min);
}

Rational brute_force_tv(const Measure& m, const Measure& v, Execution exec) {
  require_compatible(m.partition(), v.partition());
  const NodePtr roots[] = {m.tree(), v.tree()};
  const auto cells = detail::flatten(roots, m.partition().layout(), kernels::kMaxEnumerationCells);
  std::vector<Rational> deltas;
  deltas.reserve(cells.size());
  for (const auto& c : cells) deltas.push_back((c.values[0] - c.values[1]) * c.weight);
  return kernels::max_abs_signed_sum(deltas, exec);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::HoldsOnPrefix: return "HOLDS_ON_PREFIX";
    case Verdict::Fails: return "FAILS";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

std::string to_string(LimitStatus s) {
  switch (s) {
    case LimitStatus::Vanishing: return "vanishing";
    case LimitStatus::BoundedAway: return "bounded_away";
    case LimitStatus::Unknown: return "unknown";
  }
  return "?";
}

std::string to_string(Consistency c) {
  switch (c) {
    case Consistency::Consistent: return "consistent";
    case Consistency::Inconsistent: return "inconsistent";
    case Consistency::HypothesisNotMet: return "hypothesis_not_met";
    case Consistency::Undetermined: return "undetermined";
  }
  return "?";
}

ConditionResult check_condition_i(const SequencePair& seq, const std::vector<Rational>& eps_grid,
                                  std::int64_t prefix) {
  require_grid(eps_grid, "eps");
  const auto ns = prefix_indices(seq, prefix);
  const Term& lim = seq.limit();
  const auto& analytic = seq.analytic();

  ConditionResult out;
  bool all_hold = true;
  for (const auto& eps : eps_grid) {
    ParameterVerdict pv;
    pv.parameter = eps;
    pv.trace = trace_over(seq, ns, [&](const Term& t) {
      return exceedance_measure(lim.function, t.function, lim.measure, eps);
    });
    if (analytic) {
      if (auto it = analytic->exceedance.find(eps); it != analytic->exceedance.end()) {
        pv.certified = it->second.limit();
      }
    }
    const TracePoint* positive = nullptr;
    for (const auto& p : pv.trace) {
      if (pv.certified && p.value >= *pv.certified && p.value.sign() > 0) {
        positive = &p;
        break;
      }
    }
    if (pv.certified) {
      if (pv.certified->is_zero()) {
        pv.verdict = Verdict::HoldsOnPrefix;
      } else if (pv.certified->sign() > 0 && positive != nullptr) {
        pv.verdict = Verdict::Fails;
        if (!out.witness) out.witness = Witness{"eps", eps, positive->n, positive->value};
      }
    } else if (pv.trace.back().value.is_zero()) {
      pv.verdict = Verdict::HoldsOnPrefix;
    }
    all_hold = all_hold && pv.verdict == Verdict::HoldsOnPrefix;
    out.per_parameter.push_back(std::move(pv));
  }
  out.verdict = out.witness ? Verdict::Fails
                            : (all_hold ? Verdict::HoldsOnPrefix : Verdict::Inconclusive);
  return out;
}

ConditionResult check_condition_ii(const SequencePair& seq, const std::vector<Rational>& K_grid,
                                   std::int64_t prefix) {
  require_grid(K_grid, "K");
  const auto ns = prefix_indices(seq, prefix);
  const auto& analytic = seq.analytic();
  const bool certified = analytic && analytic->lower_tail_inf.has_value();

  ConditionResult out;
  for (const auto& K : K_grid) {
    ParameterVerdict pv;
    pv.parameter = K;
    pv.trace = trace_over(seq, ns, [&](const Term& t) { return lower_tail(t.function, t.measure, K); });
    pv.prefix_infimum = trace_min(pv.trace);
    if (certified) {
      pv.certified = analytic->lower_tail_inf->eval(K);
      if (pv.certified->is_zero()) {
        pv.verdict = Verdict::HoldsOnPrefix;
      } else if (pv.certified->sign() < 0 && pv.prefix_infimum->value.sign() < 0) {
        pv.verdict = Verdict::Fails;
      }
    } else if (pv.prefix_infimum->value.is_zero()) {
      pv.verdict = Verdict::HoldsOnPrefix;
    }
    out.per_parameter.push_back(std::move(pv));
  }

  // The condition concerns K -> infinity: decide from the certificate's limit,
  // or from the largest K on the grid when there is none.
  const ParameterVerdict* largest = &out.per_parameter.front();
  for (const auto& pv : out.per_parameter) {
    if (pv.parameter > largest->parameter) largest = &pv;
  }
  if (certified) {
    const Rational lim = analytic->lower_tail_inf->limit();
    if (lim.is_zero()) {
      out.verdict = Verdict::HoldsOnPrefix;
    } else if (lim.sign() < 0) {
      const ParameterVerdict* best = nullptr;
      for (const auto& pv : out.per_parameter) {
        if (pv.prefix_infimum->value.sign() < 0 && (!best || pv.parameter > best->parameter)) {
          best = &pv;
        }
      }
      if (best != nullptr) {
        out.verdict = Verdict::Fails;
        out.witness = Witness{"K", best->parameter, best->prefix_infimum->n,
                              best->prefix_infimum->value};
      }
    }
  } else if (largest->prefix_infimum->value.is_zero()) {
    out.verdict = Verdict::HoldsOnPrefix;
  }
  return out;
}

std::vector<std::int64_t> SubsequenceResult::indices() const {
  std::vector<std::int64_t> out;
  for (const auto& s : steps) out.push_back(s.n);
  return out;
}

SubsequenceResult extract_subsequence(const SequencePair& seq, const Rational& eps, int depth,
                                      std::int64_t budget) {
  if (eps.sign() <= 0) throw std::invalid_argument("eps must be positive, got " + eps.str());
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  const Term& lim = seq.limit();
  const auto candidates = seq.indices(budget);
  std::map<std::int64_t, Rational> cache;
  auto exceedance_at = [&](std::int64_t n) -> const Rational& {
    auto it = cache.find(n);
    if (it == cache.end()) {
      it = cache.emplace(n, exceedance_measure(lim.function, seq.term(n).function, lim.measure, eps))
               .first;
    }
    return it->second;
  };

  SubsequenceResult out;
  std::int64_t previous = seq.first_index() - 1;
  for (int k = 1; k <= depth; ++k) {
    const Rational bound = Rational::pow2(-k);
    std::optional<SubsequenceStep> best;
    bool found = false;
    for (std::int64_t n : candidates) {
      if (n <= previous) continue;
      const Rational& e = exceedance_at(n);
      if (!best || e < best->exceedance) best = SubsequenceStep{n, e};
      if (e <= bound) {
        out.steps.push_back(SubsequenceStep{n, e});
        previous = n;
        found = true;
        break;
      }
    }
    if (!found) {
      out.failed_step = k;
      out.best_attempt = best;
      return out;
    }
  }
  out.ok = true;
  return out;
}

StepFunction pointwise_liminf_prefix(const SequencePair& seq, std::int64_t prefix,
                                     std::int64_t start) {
  std::vector<std::int64_t> ns;
  for (std::int64_t n : seq.indices(prefix)) {
    if (n >= start) ns.push_back(n);
  }
  if (ns.empty()) {
    throw std::invalid_argument("no terms with " + std::to_string(start) + " <= n <= " +
                                std::to_string(prefix));
  }
  StepFunction acc = seq.term(ns.front()).function;
  for (std::size_t i = 1; i < ns.size(); ++i) acc = cell_min(acc, seq.term(ns[i]).function);
  return acc;
}

NotAbsolutelyContinuous::NotAbsolutelyContinuous(const std::string& cell, const Rational& mass)
    : std::invalid_argument("not absolutely continuous: cell " + cell + " has reference mass 0 but mass " +
                            mass.str()),
      cell_(cell) {}

StepFunction radon_nikodym(const SignedMeasure& t, const Measure& m) {
  require_compatible(t.partition(), m.partition());
  const std::vector<NodePtr> roots{t.tree(), m.tree()};
  const NodePtr bad = detail::zip_map(roots, [](std::span<const Rational> x) {
    return x[1].is_zero() ? x[0] : Rational();
  });
  if (const auto rank = detail::first_nonzero_leaf(bad)) {
    const auto p = CellPartition::from_tree(t.partition().kind(), t.partition().label_store(), bad);
    const auto ref = detail::leaf_at(bad, *rank);
    const Rational weight = p.kind() == PartitionKind::AtomSet
                                ? Rational(1)
                                : Rational::pow2(-static_cast<long>(ref.level));
    throw NotAbsolutelyContinuous(p.describe_cell(*rank), ref.value * weight);
  }
  const NodePtr rho = detail::zip_map(roots, [](std::span<const Rational> x) {
    return x[1].is_zero() ? Rational() : x[0] / x[1];
  });
  return StepFunction::from_tree(t.partition(), rho);
}

StepFunction radon_nikodym(const Measure& t, const Measure& m) {
  return radon_nikodym(t.as_signed(), m);
}

Rational tv_measure_tail(const SignedMeasure& t, const Measure& m, const Rational& K) {
  return ui_tail(radon_nikodym(t, m), m, K);
}

namespace {

void compare_form(std::vector<std::string>& out, const std::string& what,
                  const std::optional<ClosedForm>& form, std::int64_t n, const Rational& computed) {
  if (!form) return;
  try {
    const Rational expected = form->eval(Rational(static_cast<long>(n)));
    if (expected != computed) {
      out.push_back(what + " at n=" + std::to_string(n) + ": computed " + computed.str() +
                    ", closed form " + expected.str());
    }
  } catch (const std::exception& e) {
    out.push_back(what + " at n=" + std::to_string(n) + ": closed form not evaluable (" +
                  e.what() + ")");
  }
}

LimitStatus status_from(const std::optional<Rational>& certified, const Rational& last,
                        int bad_sign) {
  if (certified) {
    if (certified->is_zero()) return LimitStatus::Vanishing;
    if (certified->sign() == bad_sign) return LimitStatus::BoundedAway;
    return LimitStatus::Unknown;
  }
  return last.is_zero() ? LimitStatus::Vanishing : LimitStatus::Unknown;
}

}  // namespace

VerdictReport equivalence_report(const SequencePair& seq, const std::vector<Rational>& eps_grid,
                                 const std::vector<Rational>& K_grid, std::int64_t prefix) {
  require_grid(eps_grid, "eps");
  require_grid(K_grid, "K");
  const auto ns = prefix_indices(seq, prefix);
  const Term& lim = seq.limit();
  const auto& analytic = seq.analytic();

  VerdictReport r;
  r.prefix = prefix;
  r.eps_grid = eps_grid;
  r.K_grid = K_grid;

  std::vector<std::optional<ReportRow>> rows(ns.size());
  std::vector<char> nonneg(ns.size(), 0);
  kernels::for_each_index(
      ns.size(),
      [&](std::size_t i) {
        const Term t = seq.term(ns[i]);
        auto gi = gap_inf(lim.function, lim.measure, t.function, t.measure);
        rows[i] = ReportRow{ns[i],
                            gi.value,
                            gap_sup(lim.function, lim.measure, t.function, t.measure),
                            tv_distance(t.measure, lim.measure),
                            l1_distance(t.function, lim.function, lim.measure),
                            std::move(gi.witness)};
        nonneg[i] = t.function.min_value().sign() >= 0 ? 1 : 0;
      },
      Execution::Parallel);
  for (auto& row : rows) r.rows.push_back(std::move(*row));

  r.cond_i = check_condition_i(seq, eps_grid, prefix);
  r.cond_ii = check_condition_ii(seq, K_grid, prefix);

  if (analytic && analytic->gap_inf) r.gap_certified_limit = analytic->gap_inf->limit();
  if (analytic && analytic->tv) r.tv_certified_limit = analytic->tv->limit();
  r.gap_status = status_from(r.gap_certified_limit, r.rows.back().gap_inf, -1);
  r.tv_status = status_from(r.tv_certified_limit, r.rows.back().tv, 1);

  if (r.tv_status == LimitStatus::BoundedAway) {
    r.consistency = Consistency::HypothesisNotMet;
  } else if (r.tv_status == LimitStatus::Unknown || r.gap_status == LimitStatus::Unknown ||
             r.cond_i.verdict == Verdict::Inconclusive ||
             r.cond_ii.verdict == Verdict::Inconclusive) {
    r.consistency = Consistency::Undetermined;
  } else {
    const bool both_hold = r.cond_i.verdict == Verdict::HoldsOnPrefix &&
                           r.cond_ii.verdict == Verdict::HoldsOnPrefix;
    const bool gap_vanishes = r.gap_status == LimitStatus::Vanishing;
    r.consistency_flag = both_hold == gap_vanishes;
    r.consistency = *r.consistency_flag ? Consistency::Consistent : Consistency::Inconsistent;
  }

  if (analytic) {
    auto& mm = r.analytic_mismatches;
    for (const auto& row : r.rows) {
      compare_form(mm, "gap_inf", analytic->gap_inf, row.n, row.gap_inf);
      compare_form(mm, "gap_sup", analytic->gap_sup, row.n, row.gap_sup);
      compare_form(mm, "tv", analytic->tv, row.n, row.tv);
      compare_form(mm, "l1", analytic->l1, row.n, row.l1);
    }
    for (const auto& pv : r.cond_i.per_parameter) {
      auto it = analytic->exceedance.find(pv.parameter);
      if (it == analytic->exceedance.end()) continue;
      for (const auto& p : pv.trace) {
        compare_form(mm, "exceedance(eps=" + pv.parameter.str() + ")", it->second, p.n, p.value);
      }
    }
    for (const auto& pv : r.cond_ii.per_parameter) {
      const std::string tag = "lower_tail(K=" + pv.parameter.str() + ")";
      auto it = analytic->lower_tail.find(pv.parameter);
      if (it != analytic->lower_tail.end()) {
        for (const auto& p : pv.trace) compare_form(mm, tag, it->second, p.n, p.value);
      }
      if (!pv.certified) continue;
      if (*pv.certified > pv.prefix_infimum->value) {
        mm.push_back(tag + ": certified infimum " + pv.certified->str() +
                     " exceeds the prefix infimum " + pv.prefix_infimum->value.str());
      }
      if (it != analytic->lower_tail.end()) {
        try {
          const Rational inf = it->second.infimum_over_integers(seq.first_index());
          if (inf != *pv.certified) {
            mm.push_back(tag + ": infimum of the per-n form is " + inf.str() +
                         " but the certified infimum is " + pv.certified->str());
          }
        } catch (const std::exception& e) {
          mm.push_back(tag + ": per-n form infimum not evaluable (" + e.what() + ")");
        }
      }
    }
  }

  r.nonnegative = std::all_of(nonneg.begin(), nonneg.end(), [](char c) { return c != 0; });
  r.fixed_measure =
      std::all_of(r.rows.begin(), r.rows.end(), [](const ReportRow& row) { return row.tv.is_zero(); });

  const std::int64_t last = ns.back();
  for (const auto& pv : r.cond_ii.per_parameter) {
    for (std::int64_t shift = 1; shift <= last; shift *= 2) {
      std::optional<Rational> inf;
      for (const auto& p : pv.trace) {
        if (p.n >= shift && (!inf || p.value < *inf)) inf = p.value;
      }
      if (inf) r.shifted_tails.push_back(ShiftedTail{pv.parameter, shift, *inf});
    }
  }
  for (const auto& eps : eps_grid) {
    r.convergence_in_measure.push_back(NamedTrace{eps, convergence_in_measure_prefix(seq, eps, prefix)});
  }
  for (const auto& K : K_grid) {
    r.ui_tails.push_back(NamedTrace{
        K, trace_over(seq, ns, [&](const Term& t) { return ui_tail(t.function, t.measure, K); })});
  }
  return r;
}

}  // namespace fatou
