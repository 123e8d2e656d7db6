#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cxg {

// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `jobs`
// threads. The first exception thrown by any chunk is rethrown. Callers
// write into disjoint, pre-sized slots, so results never depend on jobs.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || n < 2) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  const std::size_t step = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * step;
    const std::size_t end = std::min(n, begin + step);
    if (begin >= end) break;
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cxg
