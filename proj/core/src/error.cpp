#include "vcgmm/error.hpp"

namespace vcgmm {

std::string_view to_string(ErrorKind kind) noexcept
{
  switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::empty_window: return "empty_window";
    case ErrorKind::singular: return "singular";
    case ErrorKind::no_feasible_bandwidth: return "no_feasible_bandwidth";
    case ErrorKind::degenerate_covariance: return "degenerate_covariance";
    case ErrorKind::validation: return "validation";
  }
  return "unknown";
}

} // namespace vcgmm
