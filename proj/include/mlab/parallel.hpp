#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mlab {

/// Worker count: MISMATCH_LAB_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

namespace detail {
/// Set on pool threads so nested parallel_for calls run inline.
inline thread_local bool in_worker = false;
}  // namespace detail

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results are written by
/// index, so output order never depends on scheduling. The first exception (by
/// index) is rethrown after all tasks finish. Calls made from inside a worker
/// run serially on that worker.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t workers = worker_count()) {
  if (n == 0) return;
  std::vector<std::exception_ptr> errors(n);
  auto run_one = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1 || n == 1 || detail::in_worker) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t count = workers < n ? workers : n;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      pool.emplace_back([&] {
        detail::in_worker = true;
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// parallel_for that collects fn(i) into a vector.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, std::size_t workers = worker_count()) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); }, workers);
  return out;
}

}  // namespace mlab
