#pragma once

// Uniform gap functionals, their brute-force oracle, the two conditions of
// the uniform Fatou equivalence, and the report that ties them together.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fatou/convergence.hpp"
#include "fatou/kernels.hpp"
#include "fatou/sequence.hpp"

namespace fatou {

/// inf over cell sets S of (integral_S g dv - integral_S f dm), with the
/// cells of negative difference as the minimizing set.
struct GapInf {
  Rational value;
  CellSet witness;
};

GapInf gap_inf(const StepFunction& f, const Measure& m, const StepFunction& g, const Measure& v);

/// sup over cell sets S of |integral_S g dv - integral_S f dm|.
Rational gap_sup(const StepFunction& f, const Measure& m, const StepFunction& g, const Measure& v);

enum class GapMode { Inf, Sup };

/// Enumerates all 2^cells subsets of the common refinement. Throws
/// std::length_error above kernels::kMaxEnumerationCells cells.
Rational brute_force_gap(const StepFunction& f, const Measure& m, const StepFunction& g,
                         const Measure& v, GapMode mode, Execution exec = Execution::Parallel);

/// max over +-1 cell functions h of |integral h dm - integral h dv|, by
/// enumeration. Same cell cap as brute_force_gap.
Rational brute_force_tv(const Measure& m, const Measure& v, Execution exec = Execution::Parallel);

enum class Verdict { HoldsOnPrefix, Fails, Inconclusive };

std::string to_string(Verdict v);

struct Witness {
  std::string parameter;  // "eps", "K" or "n"
  Rational parameter_value;
  std::int64_t n = 0;
  Rational value;
};

struct ParameterVerdict {
  Rational parameter;
  Trace trace;
  /// For the lower tail: inf of the trace and the first n attaining it.
  std::optional<TracePoint> prefix_infimum;
  /// Limit (condition i) or inf over all n (condition ii) from an attached closed form.
  std::optional<Rational> certified;
  Verdict verdict = Verdict::Inconclusive;
};

struct ConditionResult {
  std::vector<ParameterVerdict> per_parameter;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Witness> witness;
};

/// Exceedance traces m({f_n <= f - eps}) under the limit measure.
ConditionResult check_condition_i(const SequencePair& seq, const std::vector<Rational>& eps_grid,
                                  std::int64_t prefix);

/// Lower-tail traces of (f_n, mu_n) and their infima over the prefix.
ConditionResult check_condition_ii(const SequencePair& seq, const std::vector<Rational>& K_grid,
                                   std::int64_t prefix);

struct SubsequenceStep {
  std::int64_t n = 0;
  Rational exceedance;
};

struct SubsequenceResult {
  bool ok = false;
  /// Accepted steps; step k (1-based) satisfies exceedance <= 2^-k.
  std::vector<SubsequenceStep> steps;
  /// On failure: the step that could not be filled and the smallest
  /// exceedance seen while searching for it.
  std::optional<int> failed_step;
  std::optional<SubsequenceStep> best_attempt;

  std::vector<std::int64_t> indices() const;
};

/// Greedy selection of n_1 < n_2 < ... with exceedance at n_k <= 2^-k,
/// searching candidates up to `budget`.
SubsequenceResult extract_subsequence(const SequencePair& seq, const Rational& eps, int depth,
                                      std::int64_t budget);

/// Cellwise min of f_n over the available n in [start, prefix].
StepFunction pointwise_liminf_prefix(const SequencePair& seq, std::int64_t prefix,
                                     std::int64_t start = 1);

class NotAbsolutelyContinuous : public std::invalid_argument {
 public:
  NotAbsolutelyContinuous(const std::string& cell, const Rational& mass);
  const std::string& cell() const { return cell_; }

 private:
  std::string cell_;
};

/// Cellwise t(c) / m(c), with 0 on cells where both vanish.
StepFunction radon_nikodym(const SignedMeasure& t, const Measure& m);
StepFunction radon_nikodym(const Measure& t, const Measure& m);

/// |t|({|dt/dm| >= K})
Rational tv_measure_tail(const SignedMeasure& t, const Measure& m, const Rational& K);

enum class LimitStatus { Vanishing, BoundedAway, Unknown };
enum class Consistency { Consistent, Inconsistent, HypothesisNotMet, Undetermined };

std::string to_string(LimitStatus s);
std::string to_string(Consistency c);

struct ReportRow {
  std::int64_t n = 0;
  Rational gap_inf;
  Rational gap_sup;
  Rational tv;
  Rational l1;
  CellSet gap_witness;
};

struct ShiftedTail {
  Rational K;
  std::int64_t shift = 1;
  /// inf over n in [shift, prefix] of the lower tail.
  Rational infimum;
};

struct NamedTrace {
  Rational parameter;
  Trace trace;
};

struct VerdictReport {
  std::int64_t prefix = 0;
  std::vector<Rational> eps_grid;
  std::vector<Rational> K_grid;
  std::vector<ReportRow> rows;
  ConditionResult cond_i;
  ConditionResult cond_ii;
  LimitStatus gap_status = LimitStatus::Unknown;
  std::optional<Rational> gap_certified_limit;
  /// Vanishing means the total-variation hypothesis holds.
  LimitStatus tv_status = LimitStatus::Unknown;
  std::optional<Rational> tv_certified_limit;
  Consistency consistency = Consistency::Undetermined;
  /// Set only when every sub-verdict is decided and the hypothesis holds.
  std::optional<bool> consistency_flag;
  std::vector<std::string> analytic_mismatches;

  bool nonnegative = false;
  bool fixed_measure = false;
  std::vector<ShiftedTail> shifted_tails;
  std::vector<NamedTrace> convergence_in_measure;
  std::vector<NamedTrace> ui_tails;
};

inline const std::vector<Rational>& default_eps_grid() {
  static const std::vector<Rational> grid{Rational(1), Rational(1, 2), Rational(1, 4),
                                          Rational(1, 8)};
  return grid;
}

inline const std::vector<Rational>& default_K_grid() {
  static const std::vector<Rational> grid{Rational(1), Rational(2), Rational(4), Rational(8),
                                          Rational(16)};
  return grid;
}

inline constexpr std::int64_t kDefaultPrefix = 64;

VerdictReport equivalence_report(const SequencePair& seq, const std::vector<Rational>& eps_grid,
                                 const std::vector<Rational>& K_grid, std::int64_t prefix);

}  // namespace fatou
