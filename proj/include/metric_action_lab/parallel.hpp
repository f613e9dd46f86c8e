#pragma once

// Ordered parallel map over independent work items.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mal {

/// Thread count: explicit request, else METRIC_ACTION_LAB_THREADS, else hardware concurrency.
/// The environment variable also caps explicit requests.
inline std::size_t resolve_threads(std::size_t requested = 0) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("METRIC_ACTION_LAB_THREADS")) {
    try {
      cap = static_cast<std::size_t>(std::stoul(env));
    } catch (...) {
      cap = 0;
    }
  }
  std::size_t n = requested;
  if (n == 0) n = cap > 0 ? cap : std::max(1u, std::thread::hardware_concurrency());
  if (cap > 0) n = std::min(n, cap);
  return std::max<std::size_t>(n, 1);
}

/// out[i] = fn(i) for i < count, computed on up to `threads` workers. The first exception
/// (by index) is rethrown after all workers finish.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& fn, std::size_t threads = 1) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(count, 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace mal
