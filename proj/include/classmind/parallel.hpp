#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace classmind {

// Runs fn(i) for i in [0, n) on up to `width` threads. Results must be
// written by index so reassembly does not depend on completion order. If any
// call throws, remaining work is skipped and the exception with the lowest
// index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int width, Fn&& fn) {
  if (n == 0) return;
  const auto threads = static_cast<std::size_t>(std::clamp<std::size_t>(width < 1 ? 1 : width, 1, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (!failed.load()) {
      const auto i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace classmind
