#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace cemimo {

/// Resolves a worker count: an explicit request wins, then the
/// CE_PRECODE_THREADS environment variable, then 1.
int resolve_threads(std::optional<int> requested = std::nullopt);

/// Runs `body(i)` for i in [0, count) on up to `threads` workers. Work is
/// handed out dynamically; callers write results into per-index slots and
/// reduce in index order afterwards, so results never depend on the
/// schedule. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace cemimo
