#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace contour {

// Worker count: CONTOUR_THREADS if set and positive, else the hardware concurrency.
inline int worker_count() {
  if (const char* s = std::getenv("CONTOUR_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(i) for i in [0, n) over contiguous chunks; rethrows the first exception.
template <class Body>
void parallel_for(int n, Body&& body) {
  const int nt = std::min(worker_count(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t * n / nt; i < (t + 1) * n / nt; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace contour
