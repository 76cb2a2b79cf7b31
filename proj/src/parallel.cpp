#include "cemimo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cemimo/types.hpp"

namespace cemimo {

int resolve_threads(std::optional<int> requested) {
  if (requested) {
    require(*requested >= 1, "invalid_argument", "thread count must be >= 1");
    return *requested;
  }
  if (const char* env = std::getenv("CE_PRECODE_THREADS"); env != nullptr && *env != '\0') {
    int value = 0;
    try {
      value = std::stoi(env);
    } catch (const std::exception&) {
      throw Error("invalid_argument", std::string("CE_PRECODE_THREADS is not an integer: ") + env);
    }
    require(value >= 1, "invalid_argument", "CE_PRECODE_THREADS must be >= 1");
    return value;
  }
  return 1;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto run = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace cemimo
