// parallel.hpp
// Index-parallel loop over independent tasks. Results are written by index,
// so the outcome never depends on the worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace facilitrans {

/// Explicit count if positive, else FACILITRANS_WORKERS, else hardware concurrency.
inline int resolve_workers(std::optional<int> requested = std::nullopt) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("FACILITRANS_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count). The exception of the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
  if (n_threads == 1 || count <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, count); ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace facilitrans
