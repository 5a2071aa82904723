#pragma once

#include "vcgmm/core.hpp"

#include <algorithm>
#include <utility>

namespace vcgmm::detail {

//! Half-open index range of grid points with |s_j - s0| < h.
inline std::pair<std::size_t, std::size_t> kernel_window(const Grid& grid, double s0, double h)
{
  const double* first = grid.points().data();
  const double* last = first + grid.size();
  const double* lo = std::upper_bound(first, last, s0 - h);
  const double* hi = std::lower_bound(lo, last, s0 + h);
  return {static_cast<std::size_t>(lo - first), static_cast<std::size_t>(hi - first)};
}

} // namespace vcgmm::detail
