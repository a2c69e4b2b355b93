#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace hclimits::detail {

/// Pairwise sum whose left half is always the largest power of two below n.
/// The tree depends only on n, and duplicating every element (each at half
/// weight) reproduces the original tree one level down.
inline double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  if (v.size() == 2) return v[0] + v[1];
  const std::size_t split = std::bit_floor(v.size() - 1);
  return pairwise_sum(v.first(split)) + pairwise_sum(v.subspan(split));
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers with contiguous chunks.
/// If any call throws, rethrows the exception from the lowest failing chunk.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  constexpr std::size_t kMinPerThread = 2048;
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(1, n / kMinPerThread));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hclimits::detail
