#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace fragfem {

/// Worker count from FRAGFEM_THREADS, else hardware parallelism.
inline int default_worker_count() {
  if (const char* env = std::getenv("FRAGFEM_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline int resolve_workers(int requested) { return requested >= 1 ? requested : default_worker_count(); }

/// Splits [0, n) into `workers` contiguous ranges and runs fn(begin, end) on
/// each range in its own thread. The first exception is rethrown.
template <class Fn>
void parallel_ranges(long n, int workers, Fn&& fn) {
  workers = static_cast<int>(std::clamp<long>(workers, 1, std::max<long>(n, 1)));
  if (workers == 1) {
    fn(0L, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    long b = n * w / workers, e = n * (w + 1) / workers;
    pool.emplace_back([&, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace fragfem
