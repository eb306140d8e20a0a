#include "fatou/kernels.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <vector>

#include <omp.h>

namespace fatou::kernels {

namespace {

void check_size(std::size_t m) {
  if (m > kMaxEnumerationCells) {
    throw std::length_error("subset enumeration limited to " +
                            std::to_string(kMaxEnumerationCells) + " cells, got " +
                            std::to_string(m));
  }
}

void offer(SubsetExtrema& acc, const Rational& value, std::uint64_t mask) {
  if (value < acc.min || (value == acc.min && mask < acc.argmin)) {
    acc.min = value;
    acc.argmin = mask;
  }
  if (value > acc.max || (value == acc.max && mask < acc.argmax)) {
    acc.max = value;
    acc.argmax = mask;
  }
}

void merge(SubsetExtrema& acc, const SubsetExtrema& other) {
  if (other.min < acc.min || (other.min == acc.min && other.argmin < acc.argmin)) {
    acc.min = other.min;
    acc.argmin = other.argmin;
  }
  if (other.max > acc.max || (other.max == acc.max && other.argmax < acc.argmax)) {
    acc.max = other.max;
    acc.argmax = other.argmax;
  }
}

// Reference: every mask summed from scratch.
SubsetExtrema subset_extrema_serial(std::span<const Rational> d) {
  SubsetExtrema acc;  // empty subset: 0, mask 0
  const std::uint64_t total = std::uint64_t{1} << d.size();
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    Rational s;
    for (std::size_t c = 0; c < d.size(); ++c) {
      if ((mask >> c) & 1U) s += d[c];
    }
    offer(acc, s, mask);
  }
  return acc;
}

// Blocks of 2^low masks share their high bits; inside a block the low bits
// walk a Gray code so each step is a single addition or subtraction.
SubsetExtrema subset_extrema_parallel(std::span<const Rational> d) {
  const std::size_t m = d.size();
  const std::size_t low = std::min<std::size_t>(m, 10);
  const std::uint64_t blocks = std::uint64_t{1} << (m - low);
  const std::uint64_t block_size = std::uint64_t{1} << low;

  SubsetExtrema result;
  std::mutex result_mutex;
  const auto nblocks = static_cast<std::int64_t>(blocks);
#pragma omp parallel
  {
    SubsetExtrema local;
#pragma omp for schedule(static)
    for (std::int64_t b = 0; b < nblocks; ++b) {
      const std::uint64_t high = static_cast<std::uint64_t>(b) << low;
      Rational s;
      for (std::size_t c = low; c < m; ++c) {
        if ((high >> c) & 1U) s += d[c];
      }
      std::uint64_t gray = 0;
      offer(local, s, high);
      for (std::uint64_t i = 1; i < block_size; ++i) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(i));
        gray ^= std::uint64_t{1} << bit;
        if ((gray >> bit) & 1U) {
          s += d[bit];
        } else {
          s -= d[bit];
        }
        offer(local, s, high | gray);
      }
    }
    std::lock_guard lock(result_mutex);
    merge(result, local);
  }
  return result;
}

}  // namespace

SubsetExtrema subset_sum_extrema(std::span<const Rational> deltas, Execution exec) {
  check_size(deltas.size());
  return exec == Execution::Serial ? subset_extrema_serial(deltas)
                                   : subset_extrema_parallel(deltas);
}

Rational max_abs_signed_sum(std::span<const Rational> deltas, Execution exec) {
  check_size(deltas.size());
  if (exec == Execution::Serial) {
    Rational best;
    const std::uint64_t total = std::uint64_t{1} << deltas.size();
    for (std::uint64_t signs = 0; signs < total; ++signs) {
      Rational s;
      for (std::size_t c = 0; c < deltas.size(); ++c) {
        if ((signs >> c) & 1U) {
          s -= deltas[c];
        } else {
          s += deltas[c];
        }
      }
      best = max(best, s.abs());
    }
    return best;
  }
  // sum s_c d_c = 2 * sum_{s_c = +1} d_c - sum d_c
  const SubsetExtrema e = subset_extrema_parallel(deltas);
  const Rational total = sum(deltas, Execution::Serial);
  return max((Rational(2) * e.max - total).abs(), (Rational(2) * e.min - total).abs());
}

Rational sum(std::span<const Rational> xs, Execution exec) {
  if (exec == Execution::Serial || xs.size() < 2) {
    Rational s;
    for (const auto& x : xs) s += x;
    return s;
  }
  const int threads = omp_get_max_threads();
  std::vector<Rational> partial(static_cast<std::size_t>(threads));
  const auto n = static_cast<std::int64_t>(xs.size());
#pragma omp parallel num_threads(threads)
  {
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) partial[t] += xs[static_cast<std::size_t>(i)];
  }
  Rational s;
  for (const auto& p : partial) s += p;
  return s;
}

}  // namespace fatou::kernels
