#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace rsg {

/// Worker count: RSGRAPHIC_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n). Bodies must write only to their own slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

using LogSink = std::function<void(std::string_view)>;

}  // namespace rsg
