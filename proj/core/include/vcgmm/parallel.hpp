#pragma once

#include <cstddef>
#include <functional>

namespace vcgmm {

//! Runs body(0) ... body(count - 1) on up to `workers` threads.
//!
//! Callers write results into per-index slots; no ordering between indices is
//! implied. The first exception thrown by any body is rethrown after all
//! workers join. workers <= 1 runs serially on the calling thread.
void parallel_for(std::size_t count,
                  std::size_t workers,
                  const std::function<void(std::size_t)>& body);

//! std::thread::hardware_concurrency with a floor of 1.
std::size_t default_workers() noexcept;

} // namespace vcgmm
