#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fatou/closed_form.hpp"
#include "fatou/field.hpp"

namespace fatou {

/// One element (measure, function) of a sequence, or its limit.
struct Term {
  Measure measure;
  StepFunction function;
};

struct TracePoint {
  std::int64_t n = 0;
  Rational value;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};
using Trace = std::vector<TracePoint>;

/// Closed forms attached to a sequence. Per-n forms are in the variable n;
/// `lower_tail_inf` is in the variable K and gives inf over all n of the
/// lower tail at K.
struct AnalyticTraces {
  std::optional<ClosedForm> gap_inf;
  std::optional<ClosedForm> gap_sup;
  std::optional<ClosedForm> tv;
  std::optional<ClosedForm> l1;
  std::map<Rational, ClosedForm> exceedance;  // keyed by eps
  std::map<Rational, ClosedForm> lower_tail;  // keyed by K
  std::optional<ClosedForm> lower_tail_inf;

  friend bool operator==(const AnalyticTraces&, const AnalyticTraces&) = default;
};

/// A sequence n -> (mu_n, f_n) together with its limit pair (mu, f).
/// Terms are either produced on demand by a generator or listed explicitly.
class SequencePair {
 public:
  using Generator = std::function<Term(std::int64_t)>;

  /// Terms for every n >= first.
  static SequencePair generated(Generator generator, Term limit, std::int64_t first = 1);
  /// Throws std::invalid_argument on an empty map, n < 1, or partitions that
  /// cannot be aligned with the limit.
  static SequencePair listed(std::map<std::int64_t, Term> terms, Term limit);

  const Term& limit() const { return *limit_; }
  /// Throws std::out_of_range when n is not part of the sequence.
  Term term(std::int64_t n) const;
  bool has_term(std::int64_t n) const;
  /// Available indices n <= prefix in increasing order.
  std::vector<std::int64_t> indices(std::int64_t prefix) const;
  std::int64_t first_index() const;
  /// Largest index of a listed sequence; empty for generated ones.
  std::optional<std::int64_t> last_index() const;
  bool is_listed() const { return listed_ != nullptr; }

  /// k-th term of the result is term(picks[k-1]); picks strictly increasing.
  SequencePair subsequence(std::vector<std::int64_t> picks) const;

  SequencePair with_analytic(AnalyticTraces analytic) const;
  const std::optional<AnalyticTraces>& analytic() const { return analytic_; }

 private:
  SequencePair() = default;

  std::int64_t first_ = 1;
  Generator generator_;
  std::shared_ptr<const std::map<std::int64_t, Term>> listed_;
  std::shared_ptr<const Term> limit_;
  std::optional<AnalyticTraces> analytic_;
};

/// Throws PartitionMismatch when a term cannot be aligned with the limit.
void require_aligned(const Term& term, const Term& limit);

}  // namespace fatou
