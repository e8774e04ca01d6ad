#ifndef FSEB_SIMLAB_PARALLEL_HPP
#define FSEB_SIMLAB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fseb::simlab {

/// Worker count: explicit request, else FSEB_THREADS, else the hardware.
inline std::size_t worker_count(std::optional<std::size_t> requested = std::nullopt) {
  if (requested && *requested > 0)
    return *requested;
  if (const char* env = std::getenv("FSEB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
      return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(r) for r in [0, count), spread over `workers` threads. Each
/// index is handled exactly once; results must go to per-index slots the
/// caller preallocated. The first exception by index is rethrown after all
/// workers finish, so failures are as deterministic as results.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (std::size_t r = 0; r < count; ++r) {
      try {
        body(r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto run = [&] {
      for (std::size_t r = next.fetch_add(1); r < count; r = next.fetch_add(1)) {
        try {
          body(r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
      pool.emplace_back(run);
    for (auto& t : pool)
      t.join();
  }
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace fseb::simlab

#endif
