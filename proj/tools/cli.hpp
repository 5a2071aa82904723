#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vcgmm::cli {

// Exit codes: 0 success, 1 estimation or acceptance failure, 2 usage/input error.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

//! args excludes the program name. stdout only carries progress under
//! --verbose; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vcgmm::cli
