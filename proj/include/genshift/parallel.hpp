#pragma once

#include <cstddef>
#include <functional>

namespace genshift {

/// 0 means "all hardware threads"; the result is always at least 1.
std::size_t resolve_threads(std::size_t requested);

/// Runs fn(0..count-1) on up to `threads` workers. Work items are claimed
/// dynamically; callers that need reproducible results must not depend on
/// which worker ran an item. The first exception thrown is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

} // namespace genshift
