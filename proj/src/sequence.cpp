#include "fatou/sequence.hpp"

#include <stdexcept>
#include <string>

namespace fatou {

void require_aligned(const Term& term, const Term& limit) {
  require_compatible(term.measure.partition(), term.function.partition());
  require_compatible(term.measure.partition(), limit.measure.partition());
  require_compatible(term.function.partition(), limit.function.partition());
}

SequencePair SequencePair::generated(Generator generator, Term limit, std::int64_t first) {
  if (!generator) throw std::invalid_argument("sequence generator is empty");
  if (first < 1) throw std::invalid_argument("sequence must start at n >= 1");
  require_aligned(limit, limit);
  SequencePair s;
  s.first_ = first;
  s.generator_ = std::move(generator);
  s.limit_ = std::make_shared<const Term>(std::move(limit));
  return s;
}

SequencePair SequencePair::listed(std::map<std::int64_t, Term> terms, Term limit) {
  if (terms.empty()) throw std::invalid_argument("sequence has no terms");
  if (terms.begin()->first < 1) throw std::invalid_argument("term indices must be >= 1");
  require_aligned(limit, limit);
  for (const auto& [n, t] : terms) {
    try {
      require_aligned(t, limit);
    } catch (const PartitionMismatch& e) {
      throw PartitionMismatch("term n=" + std::to_string(n) + ": " + e.what());
    }
  }
  SequencePair s;
  s.first_ = terms.begin()->first;
  s.listed_ = std::make_shared<const std::map<std::int64_t, Term>>(std::move(terms));
  s.limit_ = std::make_shared<const Term>(std::move(limit));
  return s;
}

bool SequencePair::has_term(std::int64_t n) const {
  if (listed_) return listed_->contains(n);
  return n >= first_;
}

Term SequencePair::term(std::int64_t n) const {
  if (!has_term(n)) throw std::out_of_range("sequence has no term n=" + std::to_string(n));
  if (listed_) return listed_->at(n);
  Term t = generator_(n);
  require_aligned(t, *limit_);
  return t;
}

std::vector<std::int64_t> SequencePair::indices(std::int64_t prefix) const {
  std::vector<std::int64_t> out;
  if (listed_) {
    for (const auto& [n, t] : *listed_) {
      if (n > prefix) break;
      out.push_back(n);
    }
    return out;
  }
  for (std::int64_t n = first_; n <= prefix; ++n) out.push_back(n);
  return out;
}

std::int64_t SequencePair::first_index() const { return first_; }

std::optional<std::int64_t> SequencePair::last_index() const {
  if (listed_) return listed_->rbegin()->first;
  return std::nullopt;
}

SequencePair SequencePair::subsequence(std::vector<std::int64_t> picks) const {
  if (picks.empty()) throw std::invalid_argument("subsequence needs at least one index");
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i > 0 && picks[i] <= picks[i - 1]) {
      throw std::invalid_argument("subsequence indices must be strictly increasing");
    }
    if (!has_term(picks[i])) {
      throw std::out_of_range("sequence has no term n=" + std::to_string(picks[i]));
    }
  }
  std::map<std::int64_t, Term> terms;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    terms.emplace(static_cast<std::int64_t>(k + 1), term(picks[k]));
  }
  return listed(std::move(terms), *limit_);
}

SequencePair SequencePair::with_analytic(AnalyticTraces analytic) const {
  SequencePair s = *this;
  s.analytic_ = std::move(analytic);
  return s;
}

}  // namespace fatou
