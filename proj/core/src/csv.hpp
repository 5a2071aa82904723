#pragma once

// Minimal comma-separated reader for the numeric tables this library
// exchanges. No quoting; surrounding whitespace is trimmed.

#include "vcgmm/error.hpp"

#include <string>
#include <vector>

namespace vcgmm::csv {

struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based, per row
};

Table read(const std::string& path);

//! Parses a finite double or throws a parse error naming the location.
double parse_real(const std::string& text, const std::string& where);

} // namespace vcgmm::csv
