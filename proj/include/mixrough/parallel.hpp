#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace mixrough {

/// Runs body(i) for i in [0, count), in parallel when built with OpenMP.
/// The first exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mixrough
