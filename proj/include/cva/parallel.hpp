#pragma once

#include <cstddef>
#include <functional>

namespace cva {

/// Worker count used when a caller passes 0.
std::size_t default_workers();

/// Runs body(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Chunk boundaries never affect results as long as the body writes
/// only to its own indices; reductions belong to the caller, in index order.
/// The first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

} // namespace cva
