#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace wplab {

/// Worker budget from an explicit request, else the WPLAB_THREADS environment variable, else 1.
int resolve_threads(int requested);

/// Applies fn to every index on up to `threads` workers. Results land in index order, so the
/// output never depends on scheduling. The first exception (by index) is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t count, int threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace wplab
