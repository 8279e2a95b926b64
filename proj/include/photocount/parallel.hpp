// parallel.hpp -- contiguous-chunk fan-out over independent trials.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace photocount {

/// Worker count from PHOTOCOUNT_WORKERS, else hardware concurrency (>= 1).
inline int default_workers() {
  if (const char* env = std::getenv("PHOTOCOUNT_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, count) into `workers` contiguous chunks and calls
/// body(chunk, begin, end) for each, chunk index ascending. Results must be
/// reduced by the caller in chunk order. workers <= 0 selects the default.
/// The first exception thrown by any chunk is rethrown.
template <class Body>
void parallel_chunks(std::uint64_t count, int workers, Body&& body) {
  if (workers <= 0) workers = default_workers();
  const std::uint64_t chunks =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), count));
  auto bounds = [&](std::uint64_t c) { return count * c / chunks; };
  if (chunks == 1) {
    body(std::uint64_t{0}, std::uint64_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    threads.emplace_back([&, c] {
      try {
        body(c, bounds(c), bounds(c + 1));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace photocount
