#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace texdr {

/// Worker count resolution: explicit > TEXDR_THREADS env > hardware.
std::size_t resolve_thread_count(std::size_t requested = 0);

/// Runs fn(begin, end) over contiguous chunks of [0, count). Chunk
/// boundaries depend only on `threads`, so results of deterministic
/// per-chunk work are reproducible at a fixed thread count.
void parallel_chunks(std::size_t count, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace texdr
