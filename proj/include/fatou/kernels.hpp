#pragma once

// Data-parallel kernels. Every kernel has a serial reference path selected by
// Execution::Serial; the OpenMP path must return bit-identical results.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>

#include "fatou/rational.hpp"

namespace fatou {

enum class Execution { Serial, Parallel };

namespace kernels {

/// Largest number of cells accepted by the 2^m enumeration kernels.
inline constexpr std::size_t kMaxEnumerationCells = 20;

struct SubsetExtrema {
  Rational min;
  Rational max;
  std::uint64_t argmin = 0;  // bitmask of the first subset attaining min
  std::uint64_t argmax = 0;
};

/// Min and max of sum_{c in S} deltas[c] over all 2^m subsets S. Ties are
/// broken towards the numerically smallest mask.
SubsetExtrema subset_sum_extrema(std::span<const Rational> deltas, Execution exec);

/// max over s in {-1,+1}^m of |sum_c s_c * deltas[c]|.
Rational max_abs_signed_sum(std::span<const Rational> deltas, Execution exec);

Rational sum(std::span<const Rational> xs, Execution exec);

/// Runs fn(i) for i in [0, count). Exceptions thrown by fn are rethrown on
/// the calling thread (the first one captured wins).
template <class Fn>
void for_each_index(std::size_t count, Fn&& fn, Execution exec) {
  if (exec == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kernels
}  // namespace fatou
