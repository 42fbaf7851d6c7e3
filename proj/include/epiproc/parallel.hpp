#pragma once

#include <atomic>
#include <cstddef>
#include <stdexcept>
#include <thread>
#include <vector>

namespace epiproc::parallel {

/// Number of worker threads to use for `threads` requested (0 = hardware).
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Apply `fn(i)` for i in [0, count) and collect results in index order.
///
/// Each index writes into its own pre-sized slot, so the output is identical
/// for any thread count; determinism then only requires that fn derive all
/// randomness from its index (via rng::split_seed), never from shared state.
/// Exceptions thrown by fn are captured and rethrown on the calling thread.
template <typename T, typename Fn>
std::vector<T> map_indexed(std::size_t count, std::size_t threads, Fn&& fn) {
  std::vector<T> out(count);
  const std::size_t nthreads = std::min(resolve_threads(threads), count == 0 ? std::size_t{1} : count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          out[i] = fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
  return out;
}

}  // namespace epiproc::parallel
